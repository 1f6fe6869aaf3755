"""fraclab exponents: regularity fits from a slice CSV."""
import argparse
from pathlib import Path

from fraclab.cli.common import add_out_argument, out_dir, print_checks
from fraclab.core.console import print_header, print_info
from fraclab.schemas.report import ReportDocument
from fraclab.services import regularity_lab
from fraclab.storage.reports import provenance, write_report
from fraclab.storage.slices import read_slices


def register(subparsers) -> None:
    parser = subparsers.add_parser("exponents", help="Fit Holder exponents to solver slices")
    parser.add_argument("slice_path", type=Path, help="CSV written by `fraclab solve`")
    parser.add_argument("--s", type=float, required=True, help="Order the slices were computed with")
    parser.add_argument(
        "--boundary-tol",
        type=float,
        default=regularity_lab.EXACT_CONTACT_TOL,
        help="Contact tolerance for locating the free boundary (exact contact by default; use the run's contact_tol for penalized slices)",
    )
    add_out_argument(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    print_header(f"exponents: {args.slice_path}")
    table = read_slices(args.slice_path)
    report = regularity_lab.analyze_slices(
        s=args.s,
        grid=table.grid,
        times=table.times,
        slices=table.u,
        psi=table.psi,
        flaps=table.flap,
        boundary_tol=args.boundary_tol,
    )
    print_info(
        f"free boundary at x = {report.free_boundary_x:.6g}; "
        f"detach {report.alpha_space_detach:.3f}, flap {report.alpha_space_flap:.3f}"
    )
    checks = report.as_checks()
    print_checks(checks)
    document = ReportDocument(
        config={"slice_path": str(args.slice_path), "s": args.s},
        checks=checks,
        regularity=report,
        provenance=provenance(),
    )
    write_report(out_dir(args) / "exponents.json", document)
    return 0
