"""evidencia - Bayesian model selection for linear models from the command line."""

import argparse
import logging
import sys
from typing import List, Optional

from components import (
    add_curves_parser,
    add_select_parser,
    add_selfcheck_parser,
    add_simulate_parser,
)
from services import __version__
from services.config_manager import ConfigManager
from services.report_writer import OutputFormat
from utils.helpers import handle_evidencia_errors

logger = logging.getLogger("evidencia")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evidencia",
        description="Information criteria, Bayes factors and success-rate experiments for linear models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", "-v", action="store_true", help="log debug output to stderr")
    parser.add_argument("--config", default=None, help="JSON configuration file")
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=None,
                        help="output format (default from configuration, csv)")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    add_select_parser(subparsers)
    add_simulate_parser(subparsers)
    add_curves_parser(subparsers)
    add_selfcheck_parser(subparsers)
    return parser


def init_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@handle_evidencia_errors
def _load_config(args: argparse.Namespace) -> int:
    config = ConfigManager(args.config)
    config.load()
    if args.format is None:
        args.format = OutputFormat.parse(str(config.get("output.format", "csv"))).value
    args.config_manager = config
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, resolve configuration and dispatch; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    init_logging(args.verbose)

    status = _load_config(args)
    if status:
        return status
    logger.debug("running %s", args.command)
    return args.handler(args, args.config_manager)


if __name__ == "__main__":
    raise SystemExit(main())
