"""fraclab extension: trace of the weighted extension against the spectral operator."""
import argparse

import numpy as np

from fraclab.cli.common import add_out_argument, out_dir, print_checks
from fraclab.core.console import print_header, print_info
from fraclab.models.grid import Field, Grid1D
from fraclab.schemas.report import CheckResult, ReportDocument
from fraclab.services import extension_solver, frac_operator
from fraclab.storage.reports import provenance, write_report
from fraclab.storage.slices import write_columns

FUNCTIONS = {
    "sin": np.sin,
    "sin2": lambda x: np.sin(2.0 * x),
    "gaussian": lambda x: np.exp(-x ** 2),
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("extension", help="Dirichlet-to-Neumann trace of the extension")
    parser.add_argument("--s", type=float, default=0.5, help="Order in (0, 1)")
    parser.add_argument("--function", choices=sorted(FUNCTIONS), default="gaussian")
    parser.add_argument("--height", type=float, default=16.0, help="Strip height Y")
    parser.add_argument("--m", type=int, default=256, help="Vertical cells")
    add_out_argument(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    print_header(f"extension s={args.s} f={args.function}")
    grid = Grid1D(-4 * np.pi, 4 * np.pi, 256)
    f = Field.from_function(grid, FUNCTIONS[args.function])
    strip = extension_solver.build_strip(grid, args.s, height=args.height, m=args.m)
    c = extension_solver.extension_constant(args.s)
    dtn = extension_solver.dtn_trace(extension_solver.solve_extension(f, strip.a, strip), strip.a)
    spectral = frac_operator.build_spectral(grid, args.s).apply(f)
    recovered = -dtn.values / c
    write_columns(
        out_dir(args) / "extension_trace.csv",
        {"x": grid.nodes, "f": f.values, "dtn_over_c": recovered, "spectral": spectral.values},
    )
    print_info(f"c_(1,s) = {c:.8g}")

    error = float(np.max(np.abs(recovered - spectral.values)) / np.max(np.abs(spectral.values)))
    checks = [
        CheckResult.at_most("extension chain", error, 2e-2),
        CheckResult.at_most(
            "angular eigenvalue",
            abs(extension_solver.eigen_check(args.s) / ((1 - args.s) * args.s) - 1.0),
            1e-2,
        ),
    ]
    document = ReportDocument(
        config={"s": args.s, "function": args.function, "height": args.height, "m": args.m},
        checks=checks,
        provenance=provenance(),
    )
    write_report(out_dir(args) / "extension.json", document)
    return 3 if print_checks(checks) else 0
