"""
Command-line entry point.

Subcommands: solve, selftest, oracle, extension, exponents. Exit codes are
0 on success, 2 for configuration errors and 3 for numerical failures.
"""
import argparse
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from fraclab import __version__
from fraclab.cli import exponents, extension, oracle, selftest, solve
from fraclab.core.config import settings
from fraclab.core.console import print_error
from fraclab.core.exceptions import LabError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Parabolic fractional obstacle problem: solver and verification lab",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (solve, selftest, oracle, extension, exponents):
        command.register(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if settings.DEBUG else settings.LOG_LEVEL,
        format=settings.LOG_FORMAT,
    )

    try:
        return args.handler(args)
    except LabError as exc:
        print_error(exc.detail)
        return exc.exit_code
    except ValidationError as exc:
        print_error(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
