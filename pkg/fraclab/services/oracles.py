"""
Reference solutions: traveling waves, the fractional heat kernel and the
Duhamel representation of the forced linear flow.
"""
import logging
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import fft

from fraclab.core.exceptions import DegenerateDataError, ParameterError, ResolutionError, ShapeError
from fraclab.models.grid import Field, Grid1D
from fraclab.models.oracles import HeatKernel, TravelingWave, WaveRun
from fraclab.models.solution import ProblemSpec
from fraclab.schemas.scheme import SchemeConfig
from fraclab.services.core_fields import linf_norm
from fraclab.services.extension_solver import FramedExtensionGenerator, build_strip
from fraclab.services.obstacle_stepper import locate_free_boundary, solve

logger = logging.getLogger(__name__)


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0, 1), got {beta}")


def wave_speed(beta: float) -> float:
    """1/tan(beta*pi), exactly 0 at beta = 1/2."""
    _check_beta(beta)
    if beta == 0.5:
        return 0.0
    return float(1.0 / np.tan(beta * np.pi))


def traveling_wave(beta: float) -> TravelingWave:
    return TravelingWave(beta=beta, speed=wave_speed(beta))


def wave_trace(beta: float, grid: Grid1D) -> Field:
    """sin(beta*pi) |x|^{1+beta} for x < 0, zero for x >= 0."""
    return Field(grid, traveling_wave(beta).trace(grid.nodes))


def _check_resolution(s: float, t: float, grid: Grid1D) -> None:
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (0, 1], got {s}")
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    width = t ** (1.0 / (2.0 * s))
    if width < 2.0 * grid.h:
        raise ResolutionError(
            f"kernel width t^(1/2s) = {width:.3e} is below two cells ({2 * grid.h:.3e})"
        )


def _heat_symbol(s: float, t: float, grid: Grid1D) -> np.ndarray:
    return np.exp(-t * np.abs(grid.frequencies) ** (2.0 * s))


@lru_cache(maxsize=64)
def heat_kernel(s: float, t: float, grid: Grid1D) -> HeatKernel:
    """
    Gamma_s(t, x_j) = (1/L) sum_k exp(-t |xi_k|^{2s}) exp(i xi_k x_j).

    s = 1 is accepted (classical heat kernel) for testing.
    """
    _check_resolution(s, t, grid)
    phase = np.exp(1j * grid.frequencies * grid.x_min)
    values = fft.ifft(_heat_symbol(s, t, grid) * phase).real / grid.h
    return HeatKernel(s=s, t=t, grid=grid, values=Field(grid, values))


def heat_flow(f: Field, s: float, t: float) -> Field:
    """Gamma_s(t) * f, evaluated as the multiplier exp(-t |xi|^{2s})."""
    if t == 0:
        return f
    coeffs = fft.fft(f.values) * _heat_symbol(s, t, f.grid)
    return f.with_values(fft.ifft(coeffs).real)


def convolve(kernel: HeatKernel, f: Field) -> Field:
    """h sum_j Gamma(x_i - x_j) f_j on the periodic grid (0 must be a node)."""
    grid = kernel.grid
    if f.grid != grid:
        raise ShapeError("kernel and field live on different grids")
    origin = -grid.x_min / grid.h
    if abs(origin - round(origin)) > 1e-9:
        raise ParameterError("x = 0 must be a grid node to convolve with a sampled kernel")
    lags = np.roll(kernel.values.values, -int(round(origin)))
    values = grid.h * fft.ifft(fft.fft(lags) * fft.fft(f.values)).real
    return f.with_values(values)


def cauchy_kernel(t: float, x: np.ndarray) -> np.ndarray:
    """(1/pi) t / (t^2 + x^2), the s = 1/2 kernel on the line."""
    return t / (np.pi * (t * t + np.asarray(x) ** 2))


def periodic_cauchy_kernel(t: float, grid: Grid1D) -> Field:
    """Cauchy kernel summed over all periods, in closed form."""
    k = 2.0 * np.pi / grid.width
    x = grid.nodes
    values = np.sinh(k * t) / (grid.width * (np.cosh(k * t) - np.cos(k * x)))
    return Field(grid, values)


def kernel_scaling_bounds(
    s: float,
    times: Sequence[float],
    grid: Grid1D,
    x_max: float = 10.0,
) -> tuple[float, float]:
    """
    Extremes of Gamma_s(t, x) (t^{(1+2s)/(2s)} + |x|^{1+2s}) / t over the
    given times and |x| <= x_max.
    """
    x = grid.nodes
    near = np.abs(x) <= x_max
    lo = np.inf
    hi = -np.inf
    for t in times:
        kernel = heat_kernel(s, float(t), grid).values.values[near]
        ratio = kernel * (t ** ((1.0 + 2.0 * s) / (2.0 * s)) + np.abs(x[near]) ** (1.0 + 2.0 * s)) / t
        lo = min(lo, float(ratio.min()))
        hi = max(hi, float(ratio.max()))
    return lo, hi


def duhamel_solve(
    v0: Field,
    forcing: Sequence[Field],
    s: float,
    times: np.ndarray,
) -> Field:
    """
    Gamma(t) * v0 + int_0^t Gamma(t - tau) * f(tau) dtau at t = times[-1].

    Trapezoidal rule in tau; at tau = t the kernel is taken at half a step
    instead of the Dirac limit.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0.0 or np.any(np.diff(times) <= 0):
        raise ParameterError("times must start at 0 and increase strictly")
    if len(forcing) not in (0, times.size):
        raise ParameterError(f"need one forcing slice per time ({times.size}), got {len(forcing)}")
    t = float(times[-1])
    if t > 0:
        _check_resolution(s, t, v0.grid)
    result = heat_flow(v0, s, t).values.copy()
    if forcing and times.size > 1:
        steps = np.diff(times)
        weights = np.zeros(times.size)
        weights[:-1] += 0.5 * steps
        weights[1:] += 0.5 * steps
        for j, (tau, f) in enumerate(zip(times, forcing)):
            lag = t - tau if j < times.size - 1 else 0.5 * steps[-1]
            result += weights[j] * heat_flow(f, s, lag).values
    return v0.with_values(result)


def evolve_traveling_wave(
    beta: float,
    half_width: float = 2.0,
    n_points: int = 256,
    height: float = 2.0,
    m: int = 128,
    dt: float = 1e-3,
    T: float = 0.5,
    fit_window: tuple[float, float] = (0.1, 0.5),
) -> WaveRun:
    """
    Evolve the s = 1/2 wave with the projection scheme.

    The wave grows like |x|^{1+beta}, so it is evolved in the half-plane
    form: the generator is the extension on a strip whose side columns and
    top row follow the exact moving profile. The free boundary is tracked
    in the inner half of the box.
    """
    wave = traveling_wave(beta)
    grid = Grid1D(-half_width, half_width, n_points)
    strip = build_strip(grid, wave.s, height=height, m=m)
    generator = FramedExtensionGenerator(strip=strip, frame=wave.frame)
    psi = Field.zeros(grid)
    u0 = Field(grid, wave.trace(grid.nodes))
    problem = ProblemSpec(s=wave.s, grid=grid, psi=psi, u0=u0, T=T)
    solution = solve(problem, SchemeConfig(scheme="projection", dt=dt), generator)

    window = (-0.5 * half_width, 0.5 * half_width)
    inner = (grid.nodes >= window[0]) & (grid.nodes <= window[1])
    positions = np.array(
        [
            np.nan if (p := locate_free_boundary(u, psi, wave.s, window)) is None else p
            for u in solution.slices
        ]
    )
    times = solution.times
    use = (times >= fit_window[0] - 1e-12) & (times <= fit_window[1] + 1e-12) & np.isfinite(positions)
    if np.count_nonzero(use) < 2:
        raise DegenerateDataError(f"wave free boundary found at {np.count_nonzero(use)} times in the fit window")
    slope = float(np.polyfit(times[use], positions[use], 1)[0])
    drift = linf_norm(Field(grid, np.where(inner, solution.final.values - u0.values, 0.0)))
    logger.info(f"Wave beta={beta}: fitted speed {-slope:.5g}, exact {wave.speed:.5g}, drift {drift:.3e}")
    return WaveRun(wave=wave, times=times, positions=positions, fitted_speed=-slope, drift=drift)
