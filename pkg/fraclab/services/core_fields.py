"""
Payoff construction and the discrete norms the a-priori estimates are
stated in: L-infinity, Lipschitz and semiconvexity constants.
"""
import logging

import numpy as np

from fraclab.core.exceptions import ParameterError
from fraclab.models.grid import Field, Grid1D
from fraclab.schemas.payoff import (
    CompactBump,
    GaussianBump,
    PayoffSpec,
    SmoothedPut,
    ZeroPayoff,
)

logger = logging.getLogger(__name__)


def smooth_step(tau: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for tau <= 0, 1 for tau >= 1."""
    tau = np.asarray(tau, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(tau > 0, np.exp(-1.0 / np.where(tau > 0, tau, 1.0)), 0.0)
        right = np.where(tau < 1, np.exp(-1.0 / np.where(tau < 1, 1.0 - tau, 1.0)), 0.0)
    return left / (left + right)


def _smoothed_put(payoff: SmoothedPut, grid: Grid1D) -> np.ndarray:
    if payoff.smoothing <= 0:
        raise ParameterError(f"smoothed_put needs smoothing > 0, got {payoff.smoothing}")
    x = grid.nodes
    sigma = payoff.smoothing
    put = sigma * np.logaddexp(0.0, (payoff.strike - np.exp(x)) / sigma)
    # Blend into the left-end value over the last stretch of the box so the
    # periodic extension stays smooth.
    ramp_width = payoff.closure_fraction * grid.width
    ramp = smooth_step((x - (grid.x_max - ramp_width)) / ramp_width)
    return (1.0 - ramp) * put + ramp * put[0]


def _gaussian_bump(payoff: GaussianBump, grid: Grid1D) -> np.ndarray:
    return payoff.height * np.exp(-(((grid.nodes - payoff.center) / payoff.width) ** 2))


def _compact_bump(payoff: CompactBump, grid: Grid1D) -> np.ndarray:
    r = (grid.nodes - payoff.center) / payoff.width
    inside = np.abs(r) < 1.0
    out = np.zeros(grid.n_points)
    out[inside] = payoff.height * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def sample_payoff(payoff: PayoffSpec, grid: Grid1D) -> Field:
    """Sample the obstacle described by `payoff` at the grid nodes."""
    match payoff:
        case SmoothedPut():
            values = _smoothed_put(payoff, grid)
        case GaussianBump():
            values = _gaussian_bump(payoff, grid)
        case CompactBump():
            values = _compact_bump(payoff, grid)
        case ZeroPayoff():
            values = np.zeros(grid.n_points)
        case _:
            raise ParameterError(f"unknown payoff kind: {payoff!r}")
    logger.debug(f"Sampled {payoff.kind} payoff on {grid.n_points} nodes")
    return Field(grid, values)


def linf_norm(f: Field) -> float:
    return float(np.max(np.abs(f.values)))


def linf_diff(f: Field, g: Field) -> float:
    f.require_same_grid(g)
    return float(np.max(np.abs(f.values - g.values)))


def lipschitz_norm(f: Field, wrap: bool = True) -> float:
    """
    Largest neighbour difference quotient.

    With wrap=False the pair (last node, first node) is skipped, which is the
    right surrogate for data that is not meant to be periodic (e.g. f(x) = x).
    """
    v = f.values
    diffs = np.diff(v)
    if wrap:
        diffs = np.append(diffs, v[0] - v[-1])
    return float(np.max(np.abs(diffs)) / f.grid.h)


def second_differences(f: Field, wrap: bool = True) -> np.ndarray:
    v = f.values
    if wrap:
        return np.roll(v, -1) + np.roll(v, 1) - 2.0 * v
    return v[2:] + v[:-2] - 2.0 * v[1:-1]


def semiconvexity_constant(f: Field, wrap: bool = True) -> float:
    """Smallest C >= 0 with f + C x^2/2 discretely convex."""
    d2 = second_differences(f, wrap=wrap)
    return float(max(0.0, -np.min(d2) / f.grid.h ** 2))
