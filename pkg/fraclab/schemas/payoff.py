from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter


class SmoothedPut(BaseModel):
    """Put payoff (K - e^x)^+ in log-price, softened on scale `smoothing`."""
    kind: Literal["smoothed_put"] = "smoothed_put"
    strike: float = Field(1.0, gt=0)
    smoothing: float = Field(0.05, description="Mollification scale; must be > 0")
    closure_fraction: float = Field(
        0.125, gt=0, lt=0.5,
        description="Share of the domain used to close the payoff periodically"
    )

    model_config = ConfigDict(
        json_schema_extra={"examples": [{"kind": "smoothed_put", "strike": 1.0, "smoothing": 0.05}]}
    )


class GaussianBump(BaseModel):
    kind: Literal["gaussian_bump"] = "gaussian_bump"
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    height: float = 1.0


class CompactBump(BaseModel):
    """Smooth bump height*exp(1 - 1/(1 - r^2)) supported on |x - center| < width."""
    kind: Literal["compact_bump"] = "compact_bump"
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    height: float = 1.0


class ZeroPayoff(BaseModel):
    kind: Literal["zero"] = "zero"


PayoffSpec = Annotated[
    Union[SmoothedPut, GaussianBump, CompactBump, ZeroPayoff],
    Field(discriminator="kind"),
]

payoff_adapter: TypeAdapter = TypeAdapter(PayoffSpec)
