"""
Exponent measurements around the free boundary and the exponent maps of
the regularity argument.
"""
import logging
from typing import Sequence

import numpy as np

from fraclab.core.exceptions import DataError, DegenerateDataError, ParameterError
from fraclab.models.grid import Field, Grid1D
from fraclab.models.operators import Generator
from fraclab.models.solution import ProblemSpec, Solution
from fraclab.schemas.report import RegularityReport
from fraclab.services.extension_solver import (
    build_strip,
    monotonicity_bound,
    monotonicity_phi,
    solve_extension,
)
from fraclab.services.core_fields import lipschitz_norm
from fraclab.services.obstacle_stepper import contact_mask, free_boundary, refine_free_boundary

logger = logging.getLogger(__name__)

DETACH_TOLERANCE = 0.1
FLAP_TOLERANCE = 0.15
TIME_TOLERANCE = 0.2
MIN_RADII = 3
MIN_TIME_SAMPLES = 8
# projection lands exactly on psi
EXACT_CONTACT_TOL = 0.0


def dyadic_radii(grid: Grid1D, r_max: float | None = None) -> np.ndarray:
    """4h, 8h, ... up to min(r_max, width/8)."""
    limit = grid.width / 8.0 if r_max is None else min(r_max, grid.width / 8.0)
    radii = []
    r = 4.0 * grid.h
    while r <= limit * (1.0 + 1e-12):
        radii.append(r)
        r *= 2.0
    return np.array(radii)


def _log_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    fitted = slope * np.log(x) + intercept
    residual = float(np.sqrt(np.mean((np.log(y) - fitted) ** 2)))
    return float(slope), residual


def default_fit_radius(grid: Grid1D) -> float:
    return min(32.0 * grid.h, grid.width / 32.0)


def _check_radii(grid: Grid1D, radii: np.ndarray) -> None:
    if radii.size == 0 or radii.min() < 4.0 * grid.h * (1 - 1e-12) or radii.max() > grid.width / 8.0 * (1 + 1e-12):
        raise ParameterError(f"radii must lie in [4h, width/8] = [{4 * grid.h:.4g}, {grid.width / 8:.4g}]")


def decay_fit(
    g: Field,
    center: int,
    radii: Sequence[float],
    center_x: float | None = None,
) -> tuple[float, float]:
    """
    Slope of log sup_{B_r(center)} |g| against log r, and the RMS residual.

    With `center_x` the balls are centred on that point instead of the node
    and the supremum is taken over the piecewise-linear interpolant of g, so
    a sub-cell offset of the centre does not bias the small radii.

    Radii where the supremum vanishes are dropped; fewer than three
    remaining radii is an error.
    """
    grid = g.grid
    radii = np.asarray(radii, dtype=float)
    _check_radii(grid, radii)
    magnitude = np.abs(g.values)
    if center_x is None:
        dist = grid.periodic_distance(center)
        sups = np.array([magnitude[dist <= r * (1 + 1e-12)].max() for r in radii])
    else:
        dist = grid.distance_to_point(center_x)
        ends = np.abs(
            np.interp(
                np.concatenate([center_x - radii, center_x + radii]),
                grid.nodes,
                g.values,
                period=grid.width,
            )
        ).reshape(2, -1).max(axis=0)
        sups = np.array(
            [max(magnitude[dist <= r * (1 + 1e-12)].max(initial=0.0), end) for r, end in zip(radii, ends)]
        )
    keep = sups > 0
    if not np.all(keep):
        logger.warning(f"decay_fit: dropping {np.count_nonzero(~keep)} radii with zero supremum")
    if np.count_nonzero(keep) < MIN_RADII:
        raise DegenerateDataError(
            f"only {np.count_nonzero(keep)} radii with nonzero supremum (need {MIN_RADII})"
        )
    return _log_fit(radii[keep], sups[keep])


def c1_modulus(u: Field, center_x: float, radii: Sequence[float]) -> tuple[float, float]:
    """
    Decay exponent of osc_{B_r(center_x)} u_x against r, with u_x the
    centred difference quotient. A positive exponent is a C^1 modulus.
    """
    grid = u.grid
    radii = np.asarray(radii, dtype=float)
    _check_radii(grid, radii)
    du = (np.roll(u.values, -1) - np.roll(u.values, 1)) / (2.0 * grid.h)
    dist = grid.distance_to_point(center_x)
    osc = np.array([np.ptp(du[dist <= r * (1 + 1e-12)]) for r in radii])
    keep = osc > 0
    if np.count_nonzero(keep) < MIN_RADII:
        raise DegenerateDataError("u_x is constant on the fitting balls")
    return _log_fit(radii[keep], osc[keep])


def space_time_lipschitz(
    grid: Grid1D,
    times: np.ndarray,
    slices: Sequence[np.ndarray],
    psi: np.ndarray,
    flap0: np.ndarray,
) -> dict[str, float]:
    """
    Measured Lipschitz constants in t and x over the slices against
    ||(-Delta)^s u0|| and max(Lip u0, Lip psi).
    """
    rates = [
        float(np.max(np.abs(b - a))) / (t1 - t0)
        for a, b, t0, t1 in zip(slices[:-1], slices[1:], times[:-1], times[1:])
    ]
    return {
        "lipschitz_time": max(rates),
        "lipschitz_time_bound": float(np.max(np.abs(flap0))),
        "lipschitz_space": max(lipschitz_norm(Field(grid, u)) for u in slices),
        "lipschitz_space_bound": max(lipschitz_norm(Field(grid, slices[0])), lipschitz_norm(Field(grid, psi))),
        "lipschitz_tolerance": 10.0 * (float(np.min(np.diff(times))) + grid.h),
    }


def time_exponent(
    times: Sequence[float],
    values: Sequence[float],
    t_star: float | None = None,
) -> tuple[float, float]:
    """
    Log-log fit of |value(t) - value(t*)| against |t - t*|.

    t* defaults to the last sample.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < MIN_TIME_SAMPLES or times.size != values.size:
        raise DataError(f"need at least {MIN_TIME_SAMPLES} paired samples, got {times.size}")
    if t_star is None:
        t_star = float(times[-1])
    anchor = int(np.argmin(np.abs(times - t_star)))
    lag = np.abs(times - t_star)
    increment = np.abs(values - values[anchor])
    use = (np.arange(times.size) != anchor) & (lag > 0)
    if np.count_nonzero(use) < 2 or lag[use].max() < 4.0 * lag[use].min():
        raise DataError("time samples do not span two dyadic scales around t*")
    use &= increment > 0
    if np.count_nonzero(use) < 2:
        raise DegenerateDataError("series has zero increments around t*")
    return _log_fit(lag[use], increment[use])


def delta_alpha(alpha: float, s: float) -> float:
    """(1/4) (alpha/(alpha + 2s) - alpha/2)."""
    if not 0.0 < s < 1.0:
        raise ParameterError(f"s must lie in (0, 1), got {s}")
    if not 0.0 < alpha <= 1.0 - s:
        raise ParameterError(f"alpha must lie in (0, 1-s] = (0, {1 - s:.4g}], got {alpha}")
    return 0.25 * (alpha / (alpha + 2.0 * s) - 0.5 * alpha)


def bootstrap_phi(alpha: float, s: float) -> float:
    """(1 + alpha)(1 - s)/(1 + s); fixed point (1 - s)/(2s)."""
    return (1.0 + alpha) * (1.0 - s) / (1.0 + s)


def bootstrap_iterates(s: float, n: int = 50) -> np.ndarray:
    """Iterates of bootstrap_phi from (1 - s)/(1 + s)."""
    out = np.empty(n + 1)
    out[0] = (1.0 - s) / (1.0 + s)
    for k in range(n):
        out[k + 1] = bootstrap_phi(out[k], s)
    return out


def time_target(s: float) -> float:
    return min((1.0 - s) / (2.0 * s), 1.0)


def analyze_slices(
    s: float,
    grid: Grid1D,
    times: np.ndarray,
    slices: Sequence[np.ndarray],
    psi: np.ndarray,
    flaps: Sequence[np.ndarray],
    boundary_tol: float = EXACT_CONTACT_TOL,
    window: tuple[float, float] | None = None,
    r_max: float | None = None,
) -> RegularityReport:
    """
    Core of build_report working on raw arrays (as read back from CSV).

    The free boundary is taken from the contact set {u - psi <= boundary_tol};
    projection lands exactly on psi, so the default is exact contact. The
    fits are centred on the sub-cell boundary next to the tracked node.
    `window` restricts which free-boundary nodes are eligible (defaults to
    the inner half of the box); `r_max` caps the fitting radii (defaults to
    min(32h, width/32)).
    """
    if len(slices) < MIN_TIME_SAMPLES:
        raise DataError(f"need at least {MIN_TIME_SAMPLES} recorded slices, got {len(slices)}")
    times = np.asarray(times, dtype=float)
    psi_field = Field(grid, psi)
    masks = [contact_mask(Field(grid, u), psi_field, boundary_tol) for u in slices]
    final = masks[-1]
    if final.mask.all():
        raise DegenerateDataError("no free boundary: contact everywhere")
    if not final.mask.any():
        raise DegenerateDataError("no free boundary: fully detached")

    x = grid.nodes
    lo, hi = window if window is not None else (
        grid.x_min + 0.25 * grid.width,
        grid.x_max - 0.25 * grid.width,
    )
    candidates = [i for i in free_boundary(final) if lo <= x[i] <= hi]
    if not candidates:
        raise DegenerateDataError("no free boundary inside the analysis window")
    history = np.sum([mk.mask for mk in masks], axis=0)
    # longest contact history, lowest index on ties
    tracked = min(candidates, key=lambda i: (-history[i], i))

    gap = slices[-1] - psi
    center_x = refine_free_boundary(grid, gap, s, tracked, boundary_tol)
    radii = dyadic_radii(grid, default_fit_radius(grid) if r_max is None else r_max)
    detach = Field(grid, gap)
    flap = Field(grid, np.where(final.mask, flaps[-1], 0.0))
    alpha_detach, res_detach = decay_fit(detach, tracked, radii, center_x=center_x)
    alpha_flap, res_flap = decay_fit(flap, tracked, radii, center_x=center_x)
    notes = []
    alpha_c1 = None
    res_c1 = None
    try:
        alpha_c1, res_c1 = c1_modulus(Field(grid, slices[-1]), center_x, radii)
    except DataError as exc:
        notes.append(f"C1 modulus unavailable: {exc.detail}")
    alpha_time = None
    res_time = None
    t_star = float(times[-1])
    try:
        alpha_time, res_time = time_exponent(times, [f[tracked] for f in flaps], t_star=t_star)
    except DataError as exc:
        notes.append(f"time exponent unavailable: {exc.detail}")
        logger.warning(f"Time exponent unavailable: {exc.detail}")

    targets = {"detach": 1.0 + s, "flap": 1.0 - s, "time": time_target(s)}
    tolerances = {"detach": DETACH_TOLERANCE, "flap": FLAP_TOLERANCE, "time": TIME_TOLERANCE}
    fits = {"detach": alpha_detach, "flap": alpha_flap}
    residuals = {"detach": res_detach, "flap": res_flap}
    if res_c1 is not None:
        residuals["c1"] = res_c1
    if alpha_time is not None:
        fits["time"] = alpha_time
        residuals["time"] = res_time
    margins = {k: tolerances[k] - abs(v - targets[k]) for k, v in fits.items()}
    regime = "holder" if s > 1.0 / 3.0 else "logLip"
    if regime == "logLip":
        notes.append("s <= 1/3: time regularity is logLip, fitted exponent expected near 1")

    lip = space_time_lipschitz(grid, times, slices, psi, flaps[0])
    report = RegularityReport(
        s=s,
        alpha_space_detach=alpha_detach,
        alpha_space_flap=alpha_flap,
        alpha_time=alpha_time,
        target_detach=targets["detach"],
        target_flap=targets["flap"],
        target_time=targets["time"],
        radii_range=(float(radii[0]), float(radii[-1])),
        fit_residuals=residuals,
        pass_margins=margins,
        free_boundary_node=int(tracked),
        free_boundary_x=center_x,
        tracked_node=int(tracked),
        t_star=t_star,
        time_regime=regime,
        bootstrap_fixed_point=(1.0 - s) / (2.0 * s),
        c1_modulus_exponent=alpha_c1,
        notes=notes,
        **lip,
    )
    logger.info(
        f"Regularity s={s} at x={center_x:.5f}: detach {alpha_detach:.3f} "
        f"(target {targets['detach']:.3f}), flap {alpha_flap:.3f} (target {targets['flap']:.3f})"
    )
    return report


def fit_contact_tol(solution: Solution) -> float:
    """Exact contact under projection; the reported tolerance under penalization."""
    return EXACT_CONTACT_TOL if solution.scheme == "projection" else solution.contact_tol


def build_report(
    problem: ProblemSpec,
    solution: Solution,
    op: Generator,
    window: tuple[float, float] | None = None,
    r_max: float | None = None,
) -> RegularityReport:
    flaps = [op.apply(u).values for u in solution.slices]
    return analyze_slices(
        s=problem.s,
        grid=problem.grid,
        times=solution.times,
        slices=[u.values for u in solution.slices],
        psi=problem.psi.values,
        flaps=flaps,
        boundary_tol=fit_contact_tol(solution),
        window=window,
        r_max=r_max,
    )


def monotonicity_diagnostic(
    solution: Solution,
    op: Generator,
    report: RegularityReport,
    height: float = 4.0,
    m: int = 128,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """
    phi(r) for w, the weight -a extension of (-Delta)^s u * chi_contact at
    the final time, centred at the report's free-boundary node. Returns
    (radii, phi, violated); report-only.
    """
    grid = solution.problem.grid
    s = solution.s
    u = solution.final
    mask = contact_mask(u, solution.psi, fit_contact_tol(solution))
    trace = Field(grid, np.where(mask.mask, op.apply(u).values, 0.0))
    strip = build_strip(grid, s, height=height, m=m)
    w = solve_extension(trace, strip.a, strip, weight_sign=-1)
    radii = dyadic_radii(grid, min(height, grid.width / 8.0))
    phi = monotonicity_phi(w, radii, center_index=report.tracked_node)
    alpha = min(max(report.alpha_space_flap, 1e-3), 1.0 - s)
    _, _, violated = monotonicity_bound(phi, radii, alpha, s)
    return radii, phi, violated
