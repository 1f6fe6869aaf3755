"""
Time integration of min{u_t + A u, u - psi} = 0.

Two schemes share the implicit resolvent R = (I + dt A)^{-1}:

    projection:    u^k = max(R u^{k-1}, psi)
    penalization:  u^k = R(u^{k-1} + dt exp(-(u^{k-1} - psi)/eps)),  dt <= eps/4

The generator A is pluggable (spectral, quadrature, or a framed extension).
"""
import logging
import math

import numpy as np

from fraclab.core.exceptions import ConfigurationError, DataError, LabError, NumericalError, StepError
from fraclab.models.grid import Field, Grid1D
from fraclab.models.operators import Generator, QuadratureOp
from fraclab.models.solution import ContactMask, ProblemSpec, Solution, StepMonitor
from fraclab.schemas.report import CheckResult
from fraclab.schemas.scheme import SchemeConfig
from fraclab.services import frac_operator
from fraclab.services.core_fields import lipschitz_norm, linf_norm, semiconvexity_constant

logger = logging.getLogger(__name__)

# exp overflows past this argument
_MAX_EXPONENT = 700.0


def default_contact_tol(grid: Grid1D, s: float) -> float:
    return 10.0 * grid.h ** (1.0 + s)


def build_generator(kind: str, grid: Grid1D, s: float) -> Generator:
    if kind == "spectral":
        return frac_operator.build_spectral(grid, s)
    if kind == "quadrature":
        return frac_operator.build_quadrature(grid, s)
    raise ConfigurationError(f"unknown operator realization: {kind}")


def step_projection(u: Field, psi: Field, op: Generator, dt: float) -> Field:
    """max(R u, psi) nodewise."""
    stage = op.implicit_solve(dt, u)
    new = np.maximum(stage.values, psi.values)
    if not np.all(np.isfinite(new)):
        raise NumericalError("projection step produced non-finite values")
    return u.with_values(new)


def step_penalized(u: Field, psi: Field, op: Generator, dt: float, epsilon: float) -> Field:
    """R(u + dt beta_eps(u - psi)), penalty explicit."""
    if dt > epsilon / 4.0:
        raise ConfigurationError(
            f"dt={dt} exceeds epsilon/4={epsilon / 4.0}; the explicit penalty "
            "beta_eps(s) = exp(-s/eps) needs dt <= eps/4"
        )
    exponent = -(u.values - psi.values) / epsilon
    if np.max(exponent) > _MAX_EXPONENT:
        raise NumericalError("penalty term overflows: solution fell far below the obstacle")
    penalty = np.exp(exponent)
    return op.implicit_solve(dt, u.with_values(u.values + dt * penalty))


def _bind(op: Generator, t: float) -> Generator:
    at_time = getattr(op, "at_time", None)
    return at_time(t) if callable(at_time) else op


def step_residual(prev: Field, new: Field, op: Generator, dt: float) -> np.ndarray:
    """(u^k - u^{k-1})/dt + A u^k, the discrete u_t + (-Delta)^s u."""
    return (new.values - prev.values) / dt + op.apply(new).values


def _residual_extremes(
    fracheat: np.ndarray, new: Field, psi: Field, band_tol: float
) -> tuple[float, float]:
    """Extremes of the residual at nodes at least 3 cells from the free boundary."""
    mask = contact_mask(new, psi, band_tol)
    far = distance_to_nodes(fracheat.size, free_boundary(mask)) >= 3
    if not far.any():
        far = np.ones(fracheat.size, dtype=bool)
    return float(np.min(fracheat[far])), float(np.max(fracheat[far]))


def solve(
    problem: ProblemSpec,
    config: SchemeConfig,
    generator: Generator | None = None,
    reference: Generator | None = None,
) -> Solution:
    """
    Integrate to T with n = ceil(T/dt) equal steps of size T/n (never larger
    than the configured dt).

    The fracheat monitors evaluate the residual with `reference` (defaults
    to the stepping generator).
    """
    grid = problem.grid
    op = generator if generator is not None else build_generator(config.operator, grid, problem.s)
    measure = op if reference is None else reference
    n_steps = max(1, math.ceil(problem.T / config.dt - 1e-9))
    dt = problem.T / n_steps
    contact_tol = (
        config.contact_tol if config.contact_tol is not None else default_contact_tol(grid, problem.s)
    )
    logger.info(
        f"Solving s={problem.s} on N={grid.n_points} with {config.scheme}: "
        f"{n_steps} steps of dt={dt:.4g}"
    )

    u = problem.u0
    psi = problem.psi
    times = [0.0]
    slices = [u]
    steps = [0]
    # projection lands exactly on psi; the penalized contact set is only O(eps) close
    band_tol = 0.0 if config.scheme == "projection" else contact_tol
    monitors: list[StepMonitor] = []
    for k in range(1, n_steps + 1):
        t = k * dt
        bound = _bind(op, t)
        try:
            if config.scheme == "projection":
                new = step_projection(u, psi, bound, dt)
            else:
                new = step_penalized(u, psi, bound, dt, config.epsilon)
        except LabError as exc:
            logger.error(f"Step {k} failed: {exc.detail}")
            raise StepError(f"step {k}: {exc.detail}", step=k) from exc

        increment = new.values - u.values
        fracheat = step_residual(u, new, _bind(measure, t), dt)
        lower, upper = _residual_extremes(fracheat, new, psi, band_tol)
        monitors.append(
            StepMonitor(
                step=k,
                time=t,
                min_time_increment=float(np.min(increment)),
                lipschitz=lipschitz_norm(new),
                semiconvexity=semiconvexity_constant(new),
                fracheat_lower=lower,
                fracheat_upper=upper,
                ut_linf=float(np.max(np.abs(increment)) / dt),
            )
        )
        if k % config.record_every == 0 or k == n_steps:
            times.append(t)
            slices.append(new)
            steps.append(k)
        u = new

    logger.info(f"Finished at T={problem.T}: recorded {len(slices)} slices")
    return Solution(
        problem=problem,
        scheme=config.scheme,
        dt=dt,
        contact_tol=contact_tol,
        times=np.array(times),
        slices=slices,
        monitors=monitors,
        steps=steps,
    )


def residual(solution: Solution, step: int, op: Generator) -> Field:
    """
    min{(u^k - u^{k-1})/dt + A u^k, u^k - psi} between recorded slices
    step-1 and step.
    """
    if not 1 <= step < len(solution.slices):
        raise DataError(f"step {step} out of range 1..{len(solution.slices) - 1}")
    u = solution.slices[step]
    prev = solution.slices[step - 1]
    dt = solution.times[step] - solution.times[step - 1]
    first = step_residual(prev, u, _bind(op, solution.times[step]), dt)
    return u.with_values(np.minimum(first, u.values - solution.psi.values))


def contact_mask(u: Field, psi: Field, tol: float) -> ContactMask:
    u.require_same_grid(psi)
    return ContactMask(mask=(u.values - psi.values) <= tol, tol=float(tol))


def free_boundary(mask: ContactMask) -> np.ndarray:
    """Contact nodes with a detached neighbour (periodic)."""
    m = mask.mask
    edge = m & (~np.roll(m, 1) | ~np.roll(m, -1))
    return np.nonzero(edge)[0]


def distance_to_nodes(n: int, nodes: np.ndarray) -> np.ndarray:
    """Periodic index distance from every node to the nearest node in `nodes`."""
    if nodes.size == 0:
        return np.full(n, n)
    offsets = np.abs(np.arange(n)[:, None] - nodes[None, :])
    return np.min(np.minimum(offsets, n - offsets), axis=1)


def locate_free_boundary(
    u: Field,
    psi: Field,
    s: float,
    window: tuple[float, float] | None = None,
    tol: float = 0.0,
) -> float | None:
    """
    Position of the first detached-to-contact transition (left to right)
    inside `window`, refined by refine_free_boundary.
    """
    x = u.grid.nodes
    gap = u.values - psi.values
    lo, hi = window if window is not None else (x[0], x[-1])
    idx = np.nonzero((x >= lo) & (x <= hi))[0]
    for i, j in zip(idx[:-1], idx[1:]):
        if gap[i] > tol and gap[j] <= tol:
            if i - 2 < idx[0]:
                return float(x[j])
            return refine_free_boundary(u.grid, gap, s, int(j), tol)
    return None


def refine_free_boundary(grid: Grid1D, gap: np.ndarray, s: float, node: int, tol: float = 0.0) -> float:
    """
    Sub-cell free-boundary position next to the contact node `node`.

    (u - psi)^{1/(1+s)} is extrapolated linearly from the three detached
    nodes on the detached side; the root is clipped to the cell between
    `node` and its detached neighbour. Falls back to the node itself.
    """
    n = grid.n_points
    x = grid.nodes
    side = 1 if gap[(node + 1) % n] > tol else -1
    if gap[(node + side) % n] <= tol:
        return float(x[node])
    steps = np.arange(1, 4)
    lead = (node + side * steps) % n
    if np.any(gap[lead] <= tol):
        return float(x[node])
    # unwrapped coordinates so the fit never straddles the periodic seam
    xs = x[node] + side * steps * grid.h
    q = gap[lead] ** (1.0 / (1.0 + s))
    slope, intercept = np.polyfit(xs, q, 1)
    if slope * side <= 0:
        return float(x[node])
    root = -intercept / slope
    lo, hi = sorted((x[node], x[node] + side * grid.h))
    return float(np.clip(root, lo, hi))


def random_problem(
    rng: np.random.Generator,
    s: float,
    grid: Grid1D,
    T: float,
    on_obstacle: bool,
) -> ProblemSpec:
    """Obstacle from three Gaussian bumps placed in the inner half of the box."""
    x = grid.nodes
    center = 0.5 * (grid.x_min + grid.x_max)
    quarter = 0.25 * grid.width
    scale = grid.width / 16.0

    def bumps(count, signed):
        out = np.zeros(grid.n_points)
        for _ in range(count):
            height = rng.uniform(-1.0, 1.0) if signed else rng.uniform(0.0, 0.5)
            c = rng.uniform(center - quarter, center + quarter)
            w = rng.uniform(0.5, 1.5) * scale
            out += height * np.exp(-(((x - c) / w) ** 2))
        return out

    psi = bumps(3, signed=True)
    u0 = psi if on_obstacle else psi + bumps(1, signed=False)
    return ProblemSpec(s=s, grid=grid, psi=Field(grid, psi), u0=Field(grid, u0), T=T)


def dominating_problem(rng: np.random.Generator, problem: ProblemSpec) -> ProblemSpec:
    """A problem with psi' >= psi and u0' >= u0 built from nonnegative bumps."""
    grid = problem.grid
    x = grid.nodes
    center = 0.5 * (grid.x_min + grid.x_max)
    scale = grid.width / 16.0
    lift = rng.uniform(0.0, 0.5) * np.exp(-(((x - center - rng.uniform(-2, 2) * scale) / scale) ** 2))
    extra = rng.uniform(0.0, 0.5) * np.exp(-(((x - center - rng.uniform(-2, 2) * scale) / scale) ** 2))
    psi = problem.psi.values + lift
    u0 = psi + (problem.u0.values - problem.psi.values) + extra
    return ProblemSpec(s=problem.s, grid=grid, psi=Field(grid, psi), u0=Field(grid, u0), T=problem.T)


def comparison_check(lower: Solution, upper: Solution, tol: float) -> CheckResult:
    worst = max(float(np.max(a.values - b.values)) for a, b in zip(lower.slices, upper.slices))
    return CheckResult.at_most("comparison", worst, tol)


def lemma_checks(solution: Solution, op: Generator) -> list[CheckResult]:
    """
    Discrete a-priori estimates for one run.

    Checks whose proof needs a monotone resolvent are hard only for the
    projection scheme with the quadrature realization; otherwise they are
    reported. The penalized solution may undercut psi by O(eps), so the
    obstacle check is hard only under projection.
    """
    problem = solution.problem
    grid = problem.grid
    h = grid.h
    dt = solution.dt
    psi = problem.psi
    projection = solution.scheme == "projection"
    monotone = isinstance(op, QuadratureOp) and projection
    bound_tol = 10.0 * (dt + h)
    mon = solution.monitors

    checks = [
        CheckResult.at_most(
            "obstacle",
            max(float(np.max(psi.values - u.values)) for u in solution.slices),
            solution.contact_tol,
            hard=projection,
        ),
        CheckResult.at_most("fracheat_lower", -min(m.fracheat_lower for m in mon), bound_tol),
        CheckResult.at_most(
            "fracheat_upper",
            max(m.fracheat_upper for m in mon) - linf_norm(op.apply(psi)),
            bound_tol,
            hard=monotone,
        ),
        CheckResult.at_most(
            "ut_bound",
            max(m.ut_linf for m in mon) - linf_norm(op.apply(problem.u0)),
            bound_tol,
            hard=monotone,
        ),
        CheckResult.at_most(
            "lipschitz",
            max(m.lipschitz for m in mon) - max(lipschitz_norm(problem.u0), lipschitz_norm(psi)),
            10.0 * h,
            hard=monotone,
        ),
        CheckResult.at_most(
            "semiconvexity",
            max(m.semiconvexity for m in mon)
            - max(semiconvexity_constant(problem.u0), semiconvexity_constant(psi)),
            10.0 * h,
            hard=monotone,
        ),
    ]

    if problem.starts_on_obstacle and solution.scheme == "projection":
        checks.append(
            CheckResult.at_most(
                "time_monotone", -min(m.min_time_increment for m in mon), 1e-10, hard=monotone
            )
        )
        checks.extend(_sign_checks(solution, op, monotone))
        checks.append(_contact_shrink_check(solution, monotone))
    return checks


def _sign_checks(solution: Solution, op: Generator, hard: bool) -> list[CheckResult]:
    psi = solution.psi.values
    n = solution.problem.grid.n_points
    h = solution.problem.grid.h
    s = solution.s
    tol = 10.0 * (solution.dt + h ** min(2.0 - 2.0 * s, 1.0))
    worst_off = -np.inf
    worst_on = -np.inf
    for k in range(1, len(solution.slices)):
        u = solution.slices[k]
        flap = _bind(op, solution.times[k]).apply(u).values
        on = (u.values - psi) <= 0.0
        far = distance_to_nodes(n, free_boundary(ContactMask(on, 0.0))) >= 3
        if np.any(far & ~on):
            worst_off = max(worst_off, float(np.max(flap[far & ~on])))
        if np.any(far & on):
            worst_on = max(worst_on, float(np.max(-flap[far & on])))
    return [
        CheckResult.at_most("sign_detached", max(worst_off, 0.0), tol, hard=hard),
        CheckResult.at_most("sign_contact", max(worst_on, 0.0), tol, hard=hard),
    ]


def _contact_shrink_check(solution: Solution, hard: bool) -> CheckResult:
    n = solution.problem.grid.n_points
    violations = 0
    previous = contact_mask(solution.slices[0], solution.psi, solution.contact_tol)
    for u in solution.slices[1:]:
        current = contact_mask(u, solution.psi, solution.contact_tol)
        grown = current.mask & ~previous.mask
        band = distance_to_nodes(n, free_boundary(previous)) <= 1
        violations += int(np.count_nonzero(grown & ~band))
        previous = current
    return CheckResult.at_most("contact_shrink", violations, 0, hard=hard)
