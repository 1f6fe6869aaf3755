from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
from scipy import fft

from fraclab.core.exceptions import NumericalError, ParameterError, ShapeError
from fraclab.models.grid import Field, Grid1D


@runtime_checkable
class Generator(Protocol):
    """
    Linear (or affine) operator driving the time stepper.

    Anything that can be applied to a Field and whose resolvent
    (I + dt*A)^{-1} can be evaluated may be plugged into the stepper.
    """
    s: float
    grid: Grid1D

    def apply(self, f: Field) -> Field: ...

    def implicit_solve(self, dt: float, rhs: Field) -> Field: ...


@dataclass(frozen=True, eq=False)
class CirculantOperator:
    """Translation-invariant operator on a periodic grid, stored by its symbol."""
    s: float
    grid: Grid1D
    symbol: np.ndarray

    def __post_init__(self):
        symbol = np.array(self.symbol, dtype=float)
        symbol.setflags(write=False)
        object.__setattr__(self, "symbol", symbol)

    def _check(self, f: Field) -> None:
        if f.grid != self.grid:
            raise ShapeError(f"field grid {f.grid} does not match operator grid {self.grid}")

    def _half_symbol(self) -> np.ndarray:
        return self.symbol[: self.grid.n_points // 2 + 1]

    def apply(self, f: Field) -> Field:
        self._check(f)
        coeffs = fft.rfft(f.values) * self._half_symbol()
        return f.with_values(fft.irfft(coeffs, n=self.grid.n_points))

    def implicit_solve(self, dt: float, rhs: Field) -> Field:
        if not dt > 0:
            raise ParameterError(f"dt must be positive, got {dt}")
        self._check(rhs)
        coeffs = fft.rfft(rhs.values) / (1.0 + dt * self._half_symbol())
        values = fft.irfft(coeffs, n=self.grid.n_points)
        if not np.all(np.isfinite(values)):
            raise NumericalError("resolvent produced non-finite values")
        return rhs.with_values(values)


@dataclass(frozen=True, eq=False)
class SpectralOp(CirculantOperator):
    """Fourier multiplier |xi_k|^{2s}."""

    @property
    def multiplier(self) -> np.ndarray:
        return self.symbol


@dataclass(frozen=True, eq=False)
class QuadratureOp(CirculantOperator):
    """
    Singular-integral realization in second-difference form.

    `weights[j-1]` multiplies 2f(x) - f(x+jh) - f(x-jh) for j >= 1 (before the
    normalization), `stencil` is the assembled circulant first column.
    """
    normalization: float = 1.0
    weights: np.ndarray | None = None
    tail_radius: float = 0.0
    stencil: np.ndarray | None = None
