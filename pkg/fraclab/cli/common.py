"""Helpers shared by the subcommands."""
import argparse
from pathlib import Path
from typing import Iterable

from pydantic import ValidationError

from fraclab.core.config import settings
from fraclab.core.console import print_error, print_success, print_warning
from fraclab.core.exceptions import ConfigurationError
from fraclab.schemas.report import CheckResult
from fraclab.schemas.run import RunConfig


def add_out_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help=f"Output directory (default: $OUT_DIR or '{settings.OUT_DIR}')",
    )


def out_dir(args: argparse.Namespace) -> Path:
    return args.out if args.out is not None else Path(settings.OUT_DIR)


def load_config(path: Path) -> RunConfig:
    """Read a RunConfig; unreadable or invalid JSON is a configuration error."""
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        return RunConfig.model_validate_json(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid config {path}:\n{exc}") from exc


def print_check(check: CheckResult) -> None:
    line = f"{check.name}: measured {check.measured:.3e} vs tolerance {check.tolerance:.3e}"
    if check.passed:
        print_success(line)
    elif check.hard:
        print_error(line)
    else:
        print_warning(f"{line} (report only)")


def print_checks(checks: Iterable[CheckResult]) -> int:
    """Print every check; return the number of hard failures."""
    failures = 0
    for check in checks:
        print_check(check)
        failures += check.hard and not check.passed
    return failures
