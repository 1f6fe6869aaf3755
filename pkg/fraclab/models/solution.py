from dataclasses import dataclass, field

import numpy as np

from fraclab.core.exceptions import ParameterError
from fraclab.models.grid import Field, Grid1D


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """min{u_t + (-Delta)^s u, u - psi} = 0 on [0, T], u(0) = u0 >= psi."""
    s: float
    grid: Grid1D
    psi: Field
    u0: Field
    T: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ParameterError(f"s must lie in (0, 1), got {self.s}")
        if not self.T > 0:
            raise ParameterError(f"horizon T must be positive, got {self.T}")
        for name, f in (("psi", self.psi), ("u0", self.u0)):
            if f.grid != self.grid:
                raise ParameterError(f"{name} does not live on the problem grid")
        if np.any(self.u0.values < self.psi.values):
            worst = float(np.min(self.u0.values - self.psi.values))
            raise ParameterError(f"initial datum must lie above the obstacle (min u0 - psi = {worst:.3e})")

    @property
    def starts_on_obstacle(self) -> bool:
        return bool(np.array_equal(self.u0.values, self.psi.values))


@dataclass(frozen=True)
class StepMonitor:
    """
    Per-step diagnostics. fracheat_lower/upper are the extremes of the
    residual (u^k - u^{k-1})/dt + A u^k at nodes 3 or more cells away from
    the free boundary of u^k.
    """
    step: int
    time: float
    min_time_increment: float
    lipschitz: float
    semiconvexity: float
    fracheat_lower: float
    fracheat_upper: float
    ut_linf: float


@dataclass(frozen=True)
class ContactMask:
    mask: np.ndarray
    tol: float

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass(eq=False)
class Solution:
    problem: ProblemSpec
    scheme: str
    dt: float
    contact_tol: float
    times: np.ndarray
    slices: list[Field]
    monitors: list[StepMonitor] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)

    @property
    def final(self) -> Field:
        return self.slices[-1]

    @property
    def s(self) -> float:
        return self.problem.s

    @property
    def psi(self) -> Field:
        return self.problem.psi
