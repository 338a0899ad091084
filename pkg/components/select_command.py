"""`evidencia select`: criterion table for a measured dataset."""

import argparse
import logging
from typing import Dict, List

from services.config_manager import ConfigManager
from services.criteria import ALL_CRITERIA, CriterionProfile, select_model
from services.dataset_io import read_basis_table, read_dataset
from services.errors import ConfigError
from services.linmodel import BasisKind, BasisSpec
from services.report_writer import OutputFormat, build_manifest, write_table
from utils.helpers import handle_evidencia_errors

logger = logging.getLogger(__name__)

TABLE_COLUMNS: List[str] = ["K", "chi_sq", "F_sq"] + [kind.value for kind in ALL_CRITERIA]


def add_select_parser(subparsers) -> None:
    parser = subparsers.add_parser("select", help="score K = 1..max_K for an x,y,sigma CSV file")
    parser.add_argument("input", help="dataset CSV with header x,y,sigma")
    parser.add_argument("--basis", choices=[k.value for k in BasisKind], default=BasisKind.COSINE.value)
    parser.add_argument("--basis-csv", help="table of basis values, one row per data point (with --basis table)")
    parser.add_argument("--max-k", type=int, default=None, help="largest model dimension (default N)")
    parser.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    parser.set_defaults(handler=run_select)


def _profile_rows(profile: CriterionProfile) -> List[Dict]:
    rows = []
    for i, K in enumerate(profile.K_values):
        row = {"K": int(K), "chi_sq": float(profile.chi_sq[i]), "F_sq": float(profile.F_sq[i])}
        for kind, result in profile.results.items():
            row[kind.value] = float(result.values[i])
        rows.append(row)
    return rows


@handle_evidencia_errors
def run_select(args: argparse.Namespace, config: ConfigManager) -> int:
    data = read_dataset(args.input)
    inputs = [args.input]
    if args.basis == BasisKind.TABLE.value:
        if not args.basis_csv:
            raise ConfigError("--basis table needs --basis-csv PATH")
        basis = read_basis_table(args.basis_csv, data.n_points)
        inputs.append(args.basis_csv)
    else:
        basis = BasisSpec.cosine(data.n_points)

    profile = select_model(data, basis, args.max_k, ALL_CRITERIA)
    summary = {f"selected_K[{kind.value}]": profile.selected(kind) for kind in profile.results}
    for key, value in summary.items():
        logger.info("%s = %d", key, value)

    manifest = build_manifest(
        "select",
        {"input": args.input, "basis": args.basis, "basis_csv": args.basis_csv, "max_k": args.max_k},
        inputs=inputs,
    )
    write_table(args.output, _profile_rows(profile), TABLE_COLUMNS,
                OutputFormat.parse(args.format), manifest, summary)
    return 0
