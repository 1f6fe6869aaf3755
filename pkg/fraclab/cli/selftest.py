"""fraclab selftest: the acceptance gate."""
import argparse

from fraclab.cli.common import add_out_argument, print_checks
from fraclab.core.config import settings
from fraclab.core.console import print_error, print_header, print_info, print_success
from fraclab.schemas.run import SUITES
from fraclab.tasks.selftest import run_selftest


def register(subparsers) -> None:
    parser = subparsers.add_parser("selftest", help="Run the operator, oracle and invariant suites")
    parser.add_argument(
        "--skip",
        action="append",
        choices=SUITES,
        default=[],
        help="Suite to skip; may be repeated",
    )
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (default: $SELFTEST_SEED)")
    parser.add_argument(
        "--quadrature-scale",
        type=float,
        default=1.0,
        help="Multiply the quadrature normalization (fault injection)",
    )
    add_out_argument(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    seed = settings.SELFTEST_SEED if args.seed is None else args.seed
    report = run_selftest(seed, skip=args.skip, quadrature_scale=args.quadrature_scale)
    failures = 0
    for suite in report.suites:
        print_header(suite.suite)
        if suite.skipped:
            print_info("skipped")
            continue
        failures += print_checks(suite.checks)

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "selftest.json").write_text(report.model_dump_json(indent=2) + "\n")

    if failures:
        print_error(f"{failures} hard failures:")
        for check in report.hard_failures:
            print_error(f"  {check.name}")
        return 3
    print_success("all hard checks passed")
    return 0
