"""`evidencia curves`: criteria evaluated on the expected chi^2 and F^2."""

import argparse

from services.config_manager import ConfigManager
from services.criteria import ALL_CRITERIA
from services.report_writer import OutputFormat, build_manifest, write_table
from services.simlab import CurveConfig, criterion_curves
from utils.helpers import handle_evidencia_errors


def add_curves_parser(subparsers) -> None:
    parser = subparsers.add_parser("curves", help="analytic criterion curves for one true dimension S")
    parser.add_argument("--a", type=float, required=True, help="signal amplitude")
    parser.add_argument("--b", type=float, default=0.0, help="amplitude spread")
    parser.add_argument("--s", type=int, default=8, help="true model dimension")
    parser.add_argument("--n", type=int, default=None, help="number of data points")
    parser.add_argument("--k-max", type=int, default=None, help="largest K (default N)")
    parser.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    parser.set_defaults(handler=run_curves)


@handle_evidencia_errors
def run_curves(args: argparse.Namespace, config: ConfigManager) -> int:
    curve_config = CurveConfig.build(
        N=args.n if args.n is not None else config.get("simulation.n"),
        a=args.a,
        b=args.b,
        S=args.s,
        K_max=args.k_max,
    )
    table = criterion_curves(curve_config, ALL_CRITERIA)
    columns = ["K", "E_chi_sq", "E_F_sq"] + [kind.value for kind in ALL_CRITERIA]
    summary = {f"minimum_K[{kind.value}]": table.minimum_K(kind) for kind in ALL_CRITERIA}
    manifest = build_manifest("curves", curve_config.model_dump(mode="json"))
    write_table(args.output, table.rows(), columns, OutputFormat.parse(args.format), manifest, summary)
    return 0
