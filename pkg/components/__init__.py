from .select_command import add_select_parser, run_select
from .simulate_command import add_simulate_parser, run_simulate
from .curves_command import add_curves_parser, run_curves
from .selfcheck import add_selfcheck_parser, run_selfcheck

__all__ = [
    "add_select_parser",
    "run_select",
    "add_simulate_parser",
    "run_simulate",
    "add_curves_parser",
    "run_curves",
    "add_selfcheck_parser",
    "run_selfcheck",
]
