from dataclasses import dataclass
from typing import Callable

import numpy as np

from fraclab.core.exceptions import DataError, ParameterError, ShapeError


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform periodic grid on [x_min, x_max).

    Nodes are x_min + i*h for i = 0..n_points-1; x_max itself is identified
    with x_min.
    """
    x_min: float
    x_max: float
    n_points: int
    periodic: bool = True

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ParameterError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise ParameterError(f"n_points must be a power of two >= 2, got {n}")
        if not self.periodic:
            raise ParameterError("only periodic grids are supported")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    @property
    def frequencies(self) -> np.ndarray:
        """Angular frequencies in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.h)

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_points * factor)

    def node_index(self, x: float) -> int:
        """Nearest node to x (periodic)."""
        return int(np.rint((x - self.x_min) / self.h)) % self.n_points

    def periodic_distance(self, index: int) -> np.ndarray:
        """Distance of every node to node `index`, honouring the wrap."""
        offsets = np.abs(np.arange(self.n_points) - index)
        return self.h * np.minimum(offsets, self.n_points - offsets)

    def distance_to_point(self, x0: float) -> np.ndarray:
        """Periodic distance of every node to the point x0 (not necessarily a node)."""
        shifted = np.mod(self.nodes - x0 + 0.5 * self.width, self.width) - 0.5 * self.width
        return np.abs(shifted)


@dataclass(frozen=True, eq=False)
class Field:
    """Real function sampled on a Grid1D. Values are read-only."""
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != (self.grid.n_points,):
            raise ShapeError(
                f"values have shape {arr.shape}, grid expects ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(arr)):
            raise DataError("field contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_function(cls, grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray]) -> "Field":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def constant(cls, grid: Grid1D, value: float) -> "Field":
        return cls(grid, np.full(grid.n_points, float(value)))

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def require_same_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise ShapeError(f"grid mismatch: {self.grid} vs {other.grid}")

    def _operand(self, other) -> np.ndarray | float:
        if isinstance(other, Field):
            self.require_same_grid(other)
            return other.values
        return float(other)

    def __add__(self, other) -> "Field":
        return self.with_values(self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Field":
        return self.with_values(self.values - self._operand(other))

    def __mul__(self, other) -> "Field":
        return self.with_values(self.values * self._operand(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self.with_values(-self.values)

    def __len__(self) -> int:
        return self.grid.n_points
