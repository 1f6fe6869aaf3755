"""
Discrete realizations of the fractional Laplacian on a periodic grid.

The Fourier multiplier |xi|^{2s} is the reference. The quadrature
realization discretizes the singular integral

    C_{1,s} * int_0^inf (2f(x) - f(x+z) - f(x-z)) z^{-1-2s} dz

and must agree with it once C_{1,s} is the true constant.
"""
import logging
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft
from scipy.special import gamma

from fraclab.core.exceptions import ParameterError, ShapeError
from fraclab.models.grid import Field, Grid1D
from fraclab.models.operators import CirculantOperator, QuadratureOp, SpectralOp

logger = logging.getLogger(__name__)

# Periods of the periodic extension summed explicitly before the analytic tail
TAIL_PERIODS = 3
_GAUSS_POINTS = 8


def _check_order(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")


def build_spectral(grid: Grid1D, s: float) -> SpectralOp:
    _check_order(s)
    multiplier = np.abs(grid.frequencies) ** (2.0 * s)
    return SpectralOp(s=s, grid=grid, symbol=multiplier)


def normalization_constant(s: float) -> float:
    """C_{1,s} = s 4^s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 - s))."""
    _check_order(s)
    return float(s * 4.0 ** s * gamma(0.5 + s) / (np.sqrt(np.pi) * gamma(1.0 - s)))


def _hat_moments(s: float, n_nodes: int) -> np.ndarray:
    """
    Dimensionless weights W_j, j = 1..n_nodes, for G(z) = g(z)/z^2 on z = j
    (unit spacing), such that int_0^J g(z) z^{-1-2s} dz ~ sum_j W_j g(j).

    G is interpolated piecewise linearly on the nodes with G(0) := G(1).
    """
    p = 1.0 - 2.0 * s
    # moments of hats against t^p: cells [k, k+1], k = 1..J-1
    tau, w = leggauss(_GAUSS_POINTS)
    tau = 0.5 * (tau + 1.0)
    w = 0.5 * w
    k = np.arange(1, n_nodes)[:, None]
    tp = (k + tau[None, :]) ** p
    to_left = (tp * (1.0 - tau) * w).sum(axis=1)   # node k
    to_right = (tp * tau * w).sum(axis=1)          # node k+1

    omega = np.zeros(n_nodes + 1)  # index j = 0..J
    omega[0] = 1.0 / ((p + 1.0) * (p + 2.0))
    omega[1] = 1.0 / (p + 2.0)
    omega[1:n_nodes] += to_left
    omega[2:n_nodes + 1] += to_right

    j = np.arange(1, n_nodes + 1, dtype=float)
    weights = omega[1:] / j ** 2
    weights[0] += omega[0]
    return weights


def build_quadrature(grid: Grid1D, s: float, normalization: float | None = None) -> QuadratureOp:
    """
    Quadrature realization with nonnegative weights.

    The periodic extension is summed out to TAIL_PERIODS periods; beyond that
    the integrand is replaced by its mean-field value 2(f(x) - mean f).
    """
    _check_order(s)
    c = normalization_constant(s) if normalization is None else float(normalization)
    if c <= 0:
        raise ParameterError(f"normalization must be positive, got {c}")
    n = grid.n_points
    h = grid.h
    n_nodes = TAIL_PERIODS * n
    weights = h ** (-2.0 * s) * _hat_moments(s, n_nodes)
    tail_radius = n_nodes * h
    tail = tail_radius ** (-2.0 * s) / s

    j = np.arange(1, n_nodes + 1)
    stencil = np.zeros(n)
    np.add.at(stencil, j % n, -weights)
    np.add.at(stencil, (-j) % n, -weights)
    stencil[0] += 2.0 * weights.sum() + tail
    stencil -= tail / n
    stencil *= c

    symbol = fft.fft(stencil).real
    logger.debug(f"Built quadrature operator s={s} N={n} C={c:.6g} tail_radius={tail_radius:.4g}")
    return QuadratureOp(
        s=s,
        grid=grid,
        symbol=symbol,
        normalization=c,
        weights=weights,
        tail_radius=tail_radius,
        stencil=stencil,
    )


def apply(op: CirculantOperator, f: Field) -> Field:
    """(-Delta)^s f in the given realization."""
    return op.apply(f)


def implicit_solve(op: CirculantOperator, dt: float, rhs: Field) -> Field:
    """Solve (I + dt A) u = rhs."""
    return op.implicit_solve(dt, rhs)


def fit_normalization(
    grid: Grid1D,
    s: float,
    family: Sequence[Field],
) -> tuple[float, np.ndarray]:
    """
    Least-squares constant c minimizing sum ||c Q f - S f||^2, where Q is the
    quadrature operator with unit normalization and S the spectral one.

    Returns the pooled constant and the per-function ratios.
    """
    if not family:
        raise ParameterError("fit_normalization needs at least one test function")
    unit = build_quadrature(grid, s, normalization=1.0)
    spectral = build_spectral(grid, s)
    num = 0.0
    den = 0.0
    ratios = []
    for f in family:
        if f.grid != grid:
            raise ShapeError("test function lives on a different grid")
        q = unit.apply(f).values
        ref = spectral.apply(f).values
        qq = float(q @ q)
        qs = float(q @ ref)
        num += qs
        den += qq
        ratios.append(qs / qq)
    c = num / den
    logger.info(f"Fitted C_(1,{s}) = {c:.8g} over {len(family)} functions")
    return c, np.array(ratios)
