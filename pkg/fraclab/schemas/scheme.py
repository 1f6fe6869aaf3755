from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SchemeConfig(BaseModel):
    """Time-stepping configuration."""
    scheme: Literal["projection", "penalization"] = "projection"
    dt: float = Field(..., gt=0, description="Time step")
    epsilon: Optional[float] = Field(None, gt=0, description="Penalization scale")
    contact_tol: Optional[float] = Field(
        None, ge=0, description="Contact threshold; defaults to 10*h^(1+s)"
    )
    record_every: int = Field(1, ge=1)
    operator: Literal["spectral", "quadrature"] = "spectral"

    @model_validator(mode="after")
    def check_penalization_stability(self) -> "SchemeConfig":
        if self.scheme == "penalization":
            if self.epsilon is None:
                raise ValueError("penalization needs epsilon")
            if self.dt > self.epsilon / 4.0:
                raise ValueError(
                    f"dt={self.dt} exceeds epsilon/4={self.epsilon / 4.0}: the explicit "
                    "penalty beta_eps(s) = exp(-s/eps) is only stable for dt <= eps/4"
                )
        return self

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {"scheme": "projection", "dt": 0.01, "record_every": 5},
                {"scheme": "penalization", "dt": 0.0025, "epsilon": 0.01},
            ]
        }
    )
