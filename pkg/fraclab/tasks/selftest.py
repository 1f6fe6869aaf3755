"""
Self-test suites: the cross-realization, oracle and a-priori estimate
matrix at small sizes. Each suite returns CheckResult rows.
"""
import logging
import time
from typing import Callable, Iterable

import numpy as np

from fraclab.core.exceptions import DegenerateDataError
from fraclab.models.grid import Field, Grid1D
from fraclab.models.solution import ProblemSpec
from fraclab.schemas.payoff import SmoothedPut
from fraclab.schemas.report import CheckResult, SelftestReport, SuiteOutcome
from fraclab.schemas.run import SUITES
from fraclab.schemas.scheme import SchemeConfig
from fraclab.services import (
    core_fields,
    extension_solver,
    frac_operator,
    obstacle_stepper,
    oracles,
    regularity_lab,
)

logger = logging.getLogger(__name__)


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def operator_checks(rng: np.random.Generator, quadrature_scale: float = 1.0) -> list[CheckResult]:
    checks = []
    grid = Grid1D(-np.pi, np.pi, 512)
    for s in (0.25, 0.5, 0.75):
        op = frac_operator.build_spectral(grid, s)
        worst = 0.0
        for k in (1, 2, 8):
            f = Field.from_function(grid, lambda x: np.sin(k * x))
            worst = max(worst, _rel(op.apply(f).values, k ** (2 * s) * f.values))
        checks.append(CheckResult.at_most(f"eigenrelation s={s}", worst, 1e-10))

    wide = Grid1D(-20.0, 20.0, 2048)
    gaussian = Field.from_function(wide, lambda x: np.exp(-x ** 2))
    for s in (0.5, 0.75):
        c = frac_operator.normalization_constant(s) * quadrature_scale
        quad = frac_operator.build_quadrature(wide, s, normalization=c)
        spectral = frac_operator.build_spectral(wide, s)
        checks.append(
            CheckResult.at_most(
                f"cross-realization s={s}",
                _rel(quad.apply(gaussian).values, spectral.apply(gaussian).values),
                1e-3,
            )
        )
    family = [Field.from_function(wide, lambda x, w=w: np.exp(-(x / w) ** 2)) for w in (0.5, 1.0, 2.0)]
    fitted, _ = frac_operator.fit_normalization(wide, 0.5, family)
    checks.append(CheckResult.at_most("normalization fit s=0.5", abs(fitted * np.pi - 1.0), 5e-3))
    fitted, _ = frac_operator.fit_normalization(wide, 0.75, family[1:2])
    checks.append(
        CheckResult.at_most(
            "normalization fit s=0.75",
            abs(fitted / frac_operator.normalization_constant(0.75) - 1.0),
            5e-3,
        )
    )

    small = Grid1D(-8.0, 8.0, 256)
    f = Field(small, rng.standard_normal(256))
    g = Field(small, rng.standard_normal(256))
    for op, tol in (
        (frac_operator.build_spectral(small, 0.6), 1e-8),
        (frac_operator.build_quadrature(small, 0.6), 1e-6),
    ):
        name = type(op).__name__
        af = op.apply(f).values
        ag = op.apply(g).values
        checks.append(
            CheckResult.at_most(f"self-adjoint {name}", abs(f.values @ ag - af @ g.values), tol)
        )
        checks.append(CheckResult.at_most(f"dirichlet form {name}", -(f.values @ af), 1e-10))
        shifted = np.roll(op.apply(f).values, 7) - op.apply(f.with_values(np.roll(f.values, 7))).values
        checks.append(CheckResult.at_most(f"translation {name}", float(np.max(np.abs(shifted))), 1e-10))
    return checks


def extension_checks(rng: np.random.Generator) -> list[CheckResult]:
    checks = []
    for s in (0.5, 0.75):
        checks.append(
            CheckResult.at_most(
                f"eigenvalue s={s}",
                abs(extension_solver.eigen_check(s, 64) / ((1 - s) * s) - 1.0),
                1e-2,
            )
        )
    grid = Grid1D(-4 * np.pi, 4 * np.pi, 256)
    family = [
        Field.from_function(grid, np.sin),
        Field.from_function(grid, lambda x: np.sin(2 * x)),
        Field.from_function(grid, lambda x: np.exp(-x ** 2)),
    ]
    for s in (0.5, 0.75):
        strip = extension_solver.build_strip(grid, s, height=16.0, m=256)
        op = frac_operator.build_spectral(grid, s)
        c = extension_solver.extension_constant(s)
        worst = 0.0
        for f in family:
            dtn = extension_solver.dtn_trace(extension_solver.solve_extension(f, strip.a, strip), strip.a)
            worst = max(worst, _rel(-dtn.values / c, op.apply(f).values))
        checks.append(CheckResult.at_most(f"extension chain s={s}", worst, 2e-2))
        fitted, ratios = extension_solver.fit_extension_constant(family, strip, op)
        checks.append(
            CheckResult.at_most(f"extension constant s={s}", abs(fitted / c - 1.0), 2e-2)
        )
        checks.append(
            CheckResult.at_most(
                f"extension constant spread s={s}", float(np.ptp(ratios) / fitted), 2e-2
            )
        )

    coarse = Grid1D(-np.pi, np.pi, 32)
    strip = extension_solver.build_strip(coarse, 0.5, height=4.0, m=16)
    trace = Field(coarse, rng.standard_normal(32))
    ext = extension_solver.solve_extension(trace, strip.a, strip)
    excess = max(
        float(ext.values.max() - trace.values.max()),
        float(trace.values.min() - ext.values.min()),
    )
    checks.append(CheckResult.at_most("extension maximum principle", excess, 1e-10))
    return checks


def oracle_checks(rng: np.random.Generator) -> list[CheckResult]:
    checks = []
    grid = Grid1D(-64.0, 64.0, 4096)
    kernel = oracles.heat_kernel(0.5, 1.0, grid)
    exact = oracles.periodic_cauchy_kernel(1.0, grid)
    checks.append(
        CheckResult.at_most(
            "cauchy kernel s=0.5 t=1", core_fields.linf_diff(kernel.values, exact), 1e-6
        )
    )
    for s in (0.5, 0.75):
        k1 = oracles.heat_kernel(s, 0.5, grid)
        k2 = oracles.heat_kernel(s, 0.75, grid)
        both = oracles.heat_kernel(s, 1.25, grid)
        checks.append(
            CheckResult.at_most(
                f"semigroup s={s}",
                core_fields.linf_diff(oracles.convolve(k1, k2.values), both.values),
                1e-6,
            )
        )
        checks.append(CheckResult.at_most(f"kernel mass s={s}", abs(k1.mass - 1.0), 1e-8))
        checks.append(
            CheckResult.at_most(f"kernel positivity s={s}", -float(k1.values.values.min()), 1e-12)
        )

    for beta in (0.6, 0.75):
        try:
            run = oracles.evolve_traveling_wave(beta)
            speed_error = abs(run.fitted_speed / run.wave.speed - 1.0)
            detail = ""
        except DegenerateDataError as exc:
            speed_error = 1.0
            detail = exc.detail
        checks.append(
            CheckResult.at_most(f"wave speed beta={beta}", speed_error, 5e-2, detail=detail)
        )

    dt = 1e-3
    h = 4.0 / 256
    try:
        run = oracles.evolve_traveling_wave(0.5, dt=dt, T=1.0, fit_window=(0.1, 1.0))
        drift = run.drift
        detail = ""
    except DegenerateDataError as exc:
        drift = 1.0
        detail = exc.detail
    checks.append(
        CheckResult.at_most("wave drift beta=0.5", drift, 20.0 * (dt + h ** 1.5), detail=detail)
    )
    return checks


def stepper_checks(rng: np.random.Generator, problems_per_order: int = 20) -> list[CheckResult]:
    checks = []
    grid = Grid1D(-8.0, 8.0, 256)
    config = SchemeConfig(scheme="projection", dt=0.01, operator="quadrature")
    for s in (0.5, 0.75):
        op = frac_operator.build_quadrature(grid, s)
        for k in range(problems_per_order):
            problem = obstacle_stepper.random_problem(rng, s, grid, T=0.5, on_obstacle=k % 2 == 0)
            solution = obstacle_stepper.solve(problem, config, op)
            for check in obstacle_stepper.lemma_checks(solution, op):
                checks.append(check.model_copy(update={"name": f"{check.name} s={s} #{k}"}))
            upper = obstacle_stepper.dominating_problem(rng, problem)
            other = obstacle_stepper.solve(upper, config, op)
            check = obstacle_stepper.comparison_check(solution, other, 1e-8)
            checks.append(check.model_copy(update={"name": f"comparison s={s} #{k}"}))

    put = core_fields.sample_payoff(SmoothedPut(strike=1.0, smoothing=0.05), grid)
    problem = ProblemSpec(s=0.5, grid=grid, psi=put, u0=put, T=0.5)
    gaps = []
    for eps in (1e-2, 1e-3):
        dt = eps / 4.0
        reference = obstacle_stepper.solve(problem, SchemeConfig(scheme="projection", dt=dt))
        penalized = obstacle_stepper.solve(
            problem, SchemeConfig(scheme="penalization", dt=dt, epsilon=eps)
        )
        gaps.append(core_fields.linf_diff(reference.final, penalized.final))
        checks.append(
            CheckResult.at_most(f"projection vs penalization eps={eps:g}", gaps[-1], 5.0 * (eps + dt))
        )
    checks.append(CheckResult.at_most("penalization gap shrinks", gaps[1] - gaps[0], 0.0))

    eps = 1e-2
    penalized_config = SchemeConfig(scheme="penalization", dt=eps / 4.0, epsilon=eps)
    op = frac_operator.build_quadrature(grid, 0.5)
    lower = obstacle_stepper.random_problem(rng, 0.5, grid, T=0.5, on_obstacle=False)
    upper = obstacle_stepper.dominating_problem(rng, lower)
    checks.append(
        obstacle_stepper.comparison_check(
            obstacle_stepper.solve(lower, penalized_config, op),
            obstacle_stepper.solve(upper, penalized_config, op),
            5.0 * eps,
        ).model_copy(update={"name": "penalized comparison"})
    )

    periodic = Grid1D(-np.pi, np.pi, 128)
    wave = Field.from_function(periodic, lambda x: np.sin(2 * x))
    free = ProblemSpec(
        s=0.75, grid=periodic, psi=Field.constant(periodic, -1e6), u0=wave, T=1.0
    )
    exact = oracles.duhamel_solve(wave, [], 0.75, np.array([0.0, 1.0]))
    gaps = []
    for dt in (0.01, 0.005):
        stepped = obstacle_stepper.solve(free, SchemeConfig(dt=dt)).final
        gaps.append(core_fields.linf_diff(stepped, exact))
    checks.append(CheckResult.at_most("linear flow halving", abs(gaps[0] / gaps[1] - 2.0), 0.4))
    return checks


def exponent_checks(rng: np.random.Generator) -> list[CheckResult]:
    checks = []
    grid = Grid1D(-8.0, 8.0, 1024)
    center = grid.node_index(0.0)
    radii = regularity_lab.dyadic_radii(grid)
    for power in (0.5, 1.0, 1.5, 1.9):
        g = Field.from_function(grid, lambda x: np.abs(x) ** power)
        exponent, _ = regularity_lab.decay_fit(g, center, radii)
        checks.append(CheckResult.at_most(f"decay fit power {power}", abs(exponent - power), 1e-2))
    for s in (0.4, 0.6, 0.8):
        iterates = regularity_lab.bootstrap_iterates(s, 50)
        fixed = (1 - s) / (2 * s)
        checks.append(CheckResult.at_most(f"bootstrap s={s}", abs(iterates[-1] - fixed), 1e-10))
        checks.append(
            CheckResult.at_most(
                f"bootstrap monotone s={s}", -float(np.min(np.diff(iterates))), 1e-15
            )
        )
    lattice = [
        regularity_lab.delta_alpha(alpha, s)
        for s in np.linspace(0.05, 0.95, 10)
        for alpha in np.linspace(0.0, 1.0 - s, 11)[1:]
    ]
    checks.append(CheckResult.at_most("delta_alpha positive", -min(lattice), 0.0))
    return checks


SUITE_RUNNERS: dict[str, Callable[..., list[CheckResult]]] = {
    "operators": operator_checks,
    "extension": extension_checks,
    "oracles": oracle_checks,
    "stepper": stepper_checks,
    "exponents": exponent_checks,
}


def run_selftest(
    seed: int,
    skip: Iterable[str] = (),
    quadrature_scale: float = 1.0,
) -> SelftestReport:
    skipped = set(skip)
    outcomes = []
    for name in SUITES:
        if name in skipped:
            logger.info(f"Suite {name} skipped")
            outcomes.append(SuiteOutcome(suite=name, skipped=True))
            continue
        rng = np.random.default_rng([seed, SUITES.index(name)])
        started = time.perf_counter()
        if name == "operators":
            checks = operator_checks(rng, quadrature_scale=quadrature_scale)
        else:
            checks = SUITE_RUNNERS[name](rng)
        failures = sum(1 for c in checks if c.hard and not c.passed)
        logger.info(
            f"Suite {name}: {len(checks)} checks, {failures} hard failures "
            f"in {time.perf_counter() - started:.1f}s"
        )
        outcomes.append(SuiteOutcome(suite=name, checks=checks))
    return SelftestReport(seed=seed, suites=outcomes)
