from dataclasses import dataclass

import numpy as np

from fraclab.models.grid import Field, Grid1D


@dataclass(frozen=True)
class TravelingWave:
    """
    Half-plane profile w(x, y) = -rho^{1+beta} sin((1+beta) theta) for s = 1/2;
    u(t, x) = w(x + speed*t, 0) solves the obstacle problem with psi = 0.
    """
    beta: float
    speed: float
    s: float = 0.5

    def profile(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        rho = np.hypot(x, y)
        theta = np.arctan2(y, x)
        return -rho ** (1.0 + self.beta) * np.sin((1.0 + self.beta) * theta)

    def trace(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, np.sin(self.beta * np.pi) * np.abs(x) ** (1.0 + self.beta), 0.0)

    def frame(self, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Exact data at time t, for use as far-field boundary values."""
        return self.profile(x + self.speed * t, y)


@dataclass(frozen=True, eq=False)
class HeatKernel:
    """Periodized fundamental solution of u_t + (-Delta)^s u = 0 at time t."""
    s: float
    t: float
    grid: Grid1D
    values: Field

    @property
    def mass(self) -> float:
        return float(self.grid.h * self.values.values.sum())


@dataclass(frozen=True, eq=False)
class WaveRun:
    """Free-boundary trajectory of an evolved traveling wave."""
    wave: TravelingWave
    times: np.ndarray
    positions: np.ndarray
    fitted_speed: float
    drift: float
