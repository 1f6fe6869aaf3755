from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from fraclab.schemas.payoff import PayoffSpec, SmoothedPut
from fraclab.schemas.scheme import SchemeConfig

SUITES = ("operators", "extension", "oracles", "stepper", "exponents")


class GridParams(BaseModel):
    x_min: float = -8.0
    x_max: float = 8.0
    n_points: int = Field(1024, ge=2)

    @field_validator("n_points")
    @classmethod
    def power_of_two(cls, v: int) -> int:
        if v & (v - 1):
            raise ValueError(f"n_points must be a power of two, got {v}")
        return v


class ProblemParams(BaseModel):
    s: float = Field(..., gt=0, lt=1)
    T: float = Field(..., gt=0)
    grid: GridParams = Field(default_factory=GridParams)
    payoff: PayoffSpec = Field(default_factory=SmoothedPut)
    initial: Optional[PayoffSpec] = Field(
        None, description="Initial datum; defaults to the payoff (u0 = psi)"
    )


class OutputPaths(BaseModel):
    slice_path: str = "slices.csv"
    report_path: str = "report.json"


class RunConfig(BaseModel):
    """A complete, self-contained solver run."""
    problem: ProblemParams
    scheme: SchemeConfig
    outputs: OutputPaths = Field(default_factory=OutputPaths)
    seed: int = 0
    checks: list[Literal["lemmas", "regularity"]] = Field(
        default_factory=lambda: ["lemmas", "regularity"]
    )

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [{
                "problem": {
                    "s": 0.5,
                    "T": 0.5,
                    "grid": {"x_min": -8.0, "x_max": 8.0, "n_points": 1024},
                    "payoff": {"kind": "smoothed_put", "strike": 1.0, "smoothing": 0.05},
                },
                "scheme": {"scheme": "projection", "dt": 0.01, "record_every": 5},
                "outputs": {"slice_path": "slices.csv", "report_path": "report.json"},
                "seed": 0,
            }]
        }
    )
