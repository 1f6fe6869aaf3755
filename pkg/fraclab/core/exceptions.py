"""
Error hierarchy shared by every module.

Each error carries a human-readable ``detail`` and the process exit code the
command line maps it to (2 configuration, 3 numerical).
"""
from typing import Any


class LabError(Exception):
    exit_code: int = 3

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context = context

    def __str__(self) -> str:
        return self.detail


class ParameterError(LabError, ValueError):
    """A parameter is outside its documented range."""
    exit_code = 2


class ConfigurationError(LabError):
    """A combination of settings cannot produce a valid run."""
    exit_code = 2


class ResolutionError(ConfigurationError):
    """The grid cannot resolve the requested object."""


class ShapeError(LabError, ValueError):
    """Fields live on different grids or have the wrong length."""
    exit_code = 2


class DataError(LabError):
    exit_code = 3


class DegenerateDataError(DataError):
    """Data has no signal to fit (zero increments, empty free boundary, ...)."""


class NumericalError(LabError):
    exit_code = 3


class StepError(NumericalError):
    """A time step failed; ``step`` is the 1-based step index."""

    def __init__(self, detail: str, step: int, **context: Any):
        super().__init__(detail, step=step, **context)
        self.step = step
