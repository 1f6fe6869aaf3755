from dataclasses import dataclass

import numpy as np

from fraclab.core.exceptions import DataError, ParameterError, ShapeError
from fraclab.models.grid import Grid1D


@dataclass(frozen=True, eq=False)
class StripGrid:
    """Tensor grid base x [0, height] with y graded toward y = 0."""
    base: Grid1D
    y_nodes: np.ndarray
    height: float
    a: float
    grade: float

    def __post_init__(self):
        y = np.array(self.y_nodes, dtype=float)
        if y.ndim != 1 or y.size < 3:
            raise ParameterError("strip needs at least 3 y nodes")
        if y[0] != 0.0 or np.any(np.diff(y) <= 0):
            raise ParameterError("y nodes must start at 0 and increase strictly")
        if not -1.0 < self.a < 1.0:
            raise ParameterError(f"weight exponent a must lie in (-1, 1), got {self.a}")
        if self.grade < 1.0:
            raise ParameterError(f"grading exponent must be >= 1, got {self.grade}")
        y.setflags(write=False)
        object.__setattr__(self, "y_nodes", y)

    @property
    def s(self) -> float:
        return 0.5 * (1.0 - self.a)

    @property
    def m(self) -> int:
        """Index of the top row."""
        return self.y_nodes.size - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.n_points, self.y_nodes.size

    def dual_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper y edges of the dual cell around every y node."""
        y = self.y_nodes
        mid = 0.5 * (y[1:] + y[:-1])
        lower = np.concatenate(([0.0], mid))
        upper = np.concatenate((mid, [y[-1]]))
        return lower, upper


@dataclass(frozen=True, eq=False)
class ExtensionField:
    """
    Solution of div(y^weight grad F) = 0 on a strip.

    values[:, j] is the horizontal slice at y_nodes[j]; values[:, 0] is the
    prescribed trace.
    """
    strip: StripGrid
    values: np.ndarray
    weight: float

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.shape != self.strip.shape:
            raise ShapeError(f"values have shape {arr.shape}, strip expects {self.strip.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("extension contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def slice(self, j: int) -> np.ndarray:
        return self.values[:, j]
