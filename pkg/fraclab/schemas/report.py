from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

C1_TOLERANCE = 0.1


class CheckResult(BaseModel):
    """One measured quantity against its tolerance."""
    name: str
    measured: float
    tolerance: float
    passed: bool
    hard: bool = True
    detail: str = ""

    model_config = ConfigDict(allow_inf_nan=False)

    @classmethod
    def at_most(cls, name: str, measured: float, tolerance: float, hard: bool = True, detail: str = "") -> "CheckResult":
        return cls(
            name=name,
            measured=float(measured),
            tolerance=float(tolerance),
            passed=bool(measured <= tolerance),
            hard=hard,
            detail=detail,
        )


class ExponentFit(BaseModel):
    exponent: float
    residual: float
    target: float
    tolerance: float
    margin: float = Field(..., description="tolerance - |exponent - target|; >= 0 means pass")


class RegularityReport(BaseModel):
    s: float
    alpha_space_detach: float
    alpha_space_flap: float
    alpha_time: Optional[float] = None
    target_detach: float
    target_flap: float
    target_time: float
    radii_range: tuple[float, float]
    fit_residuals: dict[str, float]
    pass_margins: dict[str, float]
    free_boundary_node: int
    free_boundary_x: float = Field(..., description="sub-cell position the decay fits are centred on")
    tracked_node: int
    t_star: float = Field(..., description="anchor time of the time-exponent fit")
    time_regime: str = Field(..., description="'holder' for s > 1/3, 'logLip' otherwise")
    bootstrap_fixed_point: float
    lipschitz_time: float = Field(..., description="max |u(t2) - u(t1)|/(t2 - t1) over slices")
    lipschitz_time_bound: float = Field(..., description="||(-Delta)^s u0||_inf")
    lipschitz_space: float = Field(..., description="max spatial Lipschitz norm over slices")
    lipschitz_space_bound: float = Field(..., description="max(Lip u0, Lip psi)")
    lipschitz_tolerance: float
    c1_modulus_exponent: Optional[float] = Field(
        None, description="decay exponent of the oscillation of u_x on balls at the free boundary"
    )
    notes: list[str] = Field(default_factory=list)

    model_config = ConfigDict(allow_inf_nan=False)

    def as_checks(self) -> list[CheckResult]:
        """Exponent fits and space-time bounds as report-only rows (finite grids give no hard guarantee)."""
        checks = [
            CheckResult(
                name=f"exponent:{key}",
                measured=-margin,
                tolerance=0.0,
                passed=margin >= 0.0,
                hard=False,
            )
            for key, margin in self.pass_margins.items()
        ]
        checks.append(
            CheckResult.at_most(
                "lipschitz_time",
                self.lipschitz_time - self.lipschitz_time_bound,
                self.lipschitz_tolerance,
                hard=False,
            )
        )
        checks.append(
            CheckResult.at_most(
                "lipschitz_space",
                self.lipschitz_space - self.lipschitz_space_bound,
                self.lipschitz_tolerance,
                hard=False,
            )
        )
        # u_x continuous: its oscillation on B_r decays at least like r^s
        if self.c1_modulus_exponent is not None:
            checks.append(
                CheckResult.at_most(
                    "c1_modulus", self.s - self.c1_modulus_exponent, C1_TOLERANCE, hard=False
                )
            )
        return checks


class Provenance(BaseModel):
    package: str
    version: str
    python: str
    numpy: str
    scipy: str
    pydantic: str


class ReportDocument(BaseModel):
    config: dict
    checks: list[CheckResult]
    regularity: Optional[RegularityReport] = None
    regularity_error: Optional[str] = None
    oracles: list[CheckResult] = Field(default_factory=list)
    provenance: Provenance

    model_config = ConfigDict(allow_inf_nan=False)

    @property
    def hard_failures(self) -> list[CheckResult]:
        return [c for c in self.checks + self.oracles if c.hard and not c.passed]


class SuiteOutcome(BaseModel):
    suite: str
    skipped: bool = False
    checks: list[CheckResult] = Field(default_factory=list)


class SelftestReport(BaseModel):
    seed: int
    suites: list[SuiteOutcome]

    @property
    def hard_failures(self) -> list[CheckResult]:
        return [c for suite in self.suites for c in suite.checks if c.hard and not c.passed]
