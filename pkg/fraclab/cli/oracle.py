"""fraclab oracle: closed-form wave traces and heat kernels as CSV."""
import argparse

from fraclab.cli.common import add_out_argument, out_dir, print_checks
from fraclab.core.console import print_header, print_info
from fraclab.models.grid import Grid1D
from fraclab.schemas.report import CheckResult, ReportDocument
from fraclab.services import core_fields, oracles
from fraclab.storage.reports import provenance, write_report
from fraclab.storage.slices import write_columns


def register(subparsers) -> None:
    parser = subparsers.add_parser("oracle", help="Write a traveling-wave trace or a heat kernel")
    parser.add_argument("kind", choices=("wave", "kernel"))
    parser.add_argument("--beta", type=float, default=0.75, help="Wave exponent in (0,1); waves recede for beta > 1/2")
    parser.add_argument("--s", type=float, default=0.5, help="Kernel order in (0, 1]")
    parser.add_argument("--t", type=float, default=1.0, help="Kernel time > 0")
    parser.add_argument("--evolve", action="store_true", help="Also evolve the wave and fit its speed")
    add_out_argument(parser)
    parser.set_defaults(handler=run)


def _wave(args: argparse.Namespace) -> list[CheckResult]:
    grid = Grid1D(-8.0, 8.0, 1024)
    wave = oracles.traveling_wave(args.beta)
    trace = oracles.wave_trace(args.beta, grid)
    write_columns(out_dir(args) / "wave_trace.csv", {"x": grid.nodes, "u": trace.values})
    print_info(f"beta={args.beta}: speed 1/tan(beta pi) = {wave.speed:.6g}")
    if not args.evolve:
        return []
    run = oracles.evolve_traveling_wave(args.beta)
    write_columns(
        out_dir(args) / "wave_positions.csv",
        {"t": run.times, "free_boundary": run.positions},
    )
    if wave.speed == 0.0:
        return [CheckResult.at_most("wave drift", run.drift, 20.0 * (1e-3 + (4.0 / 256) ** 1.5), hard=False)]
    return [
        CheckResult.at_most(
            "wave speed", abs(run.fitted_speed / wave.speed - 1.0), 5e-2, hard=False
        )
    ]


def _kernel(args: argparse.Namespace) -> list[CheckResult]:
    grid = Grid1D(-64.0, 64.0, 4096)
    kernel = oracles.heat_kernel(args.s, args.t, grid)
    columns = {"x": grid.nodes, "kernel": kernel.values.values}
    checks = [CheckResult.at_most("kernel mass", abs(kernel.mass - 1.0), 1e-8)]
    if args.s == 0.5:
        cauchy = oracles.periodic_cauchy_kernel(args.t, grid)
        columns["cauchy"] = cauchy.values
        checks.append(
            CheckResult.at_most("cauchy profile", core_fields.linf_diff(kernel.values, cauchy), 1e-6)
        )
    write_columns(out_dir(args) / "kernel.csv", columns)
    return checks


def run(args: argparse.Namespace) -> int:
    print_header(f"oracle {args.kind}")
    checks = _wave(args) if args.kind == "wave" else _kernel(args)
    document = ReportDocument(
        config={key: value for key, value in vars(args).items() if key in ("kind", "beta", "s", "t", "evolve")},
        checks=[],
        oracles=checks,
        provenance=provenance(),
    )
    write_report(out_dir(args) / f"oracle_{args.kind}.json", document)
    return 3 if print_checks(checks) else 0
