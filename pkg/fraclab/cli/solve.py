"""fraclab solve: run one obstacle problem from a JSON config."""
import argparse
import logging
from pathlib import Path

from fraclab.cli.common import add_out_argument, load_config, out_dir, print_checks
from fraclab.core.console import print_header, print_info, print_warning
from fraclab.core.exceptions import DataError, ParameterError
from fraclab.models.grid import Grid1D
from fraclab.models.solution import ProblemSpec
from fraclab.schemas.report import CheckResult, ReportDocument
from fraclab.schemas.run import RunConfig
from fraclab.services import core_fields, obstacle_stepper, regularity_lab
from fraclab.storage.reports import provenance, write_report
from fraclab.storage.slices import write_slices

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Solve an obstacle problem and write slices + report")
    parser.add_argument("--config", type=Path, required=True, help="RunConfig JSON file")
    parser.add_argument("--seed", type=int, default=None, help="Override the config seed")
    add_out_argument(parser)
    parser.set_defaults(handler=run)


def build_problem(config: RunConfig) -> ProblemSpec:
    params = config.problem
    grid = Grid1D(params.grid.x_min, params.grid.x_max, params.grid.n_points)
    psi = core_fields.sample_payoff(params.payoff, grid)
    initial = params.initial if params.initial is not None else params.payoff
    u0 = core_fields.sample_payoff(initial, grid)
    return ProblemSpec(s=params.s, grid=grid, psi=psi, u0=u0, T=params.T)


def solve_config(config: RunConfig, out: Path) -> ReportDocument:
    """Run the configured problem and write both artifacts under `out`."""
    problem = build_problem(config)
    op = obstacle_stepper.build_generator(config.scheme.operator, problem.grid, problem.s)
    solution = obstacle_stepper.solve(problem, config.scheme, op)
    write_slices(out / config.outputs.slice_path, solution, op)

    checks = []
    if "lemmas" in config.checks:
        checks.extend(obstacle_stepper.lemma_checks(solution, op))

    regularity = None
    regularity_error = None
    if "regularity" in config.checks:
        try:
            regularity = regularity_lab.build_report(problem, solution, op)
            checks.extend(regularity.as_checks())
            _, _, violated = regularity_lab.monotonicity_diagnostic(solution, op, regularity)
            checks.append(
                CheckResult.at_most("monotonicity_phi", float(violated), 0.0, hard=False)
            )
        except (DataError, ParameterError) as exc:
            regularity_error = exc.detail
            logger.warning(f"Regularity analysis skipped: {exc.detail}")

    document = ReportDocument(
        config=config.model_dump(mode="json"),
        checks=checks,
        regularity=regularity,
        regularity_error=regularity_error,
        provenance=provenance(),
    )
    write_report(out / config.outputs.report_path, document)
    return document


def run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    print_header(f"solve: {args.config}")
    document = solve_config(config, out_dir(args))
    failures = print_checks(document.checks)
    if document.regularity_error:
        print_warning(f"regularity: {document.regularity_error}")
    print_info(f"artifacts in {out_dir(args)}")
    return 3 if failures else 0
