__version__ = "1.0.0"

from .errors import EvidenciaError
from .config_manager import ConfigManager
from .linmodel import BasisSpec, Dataset, fit, fit_profile, noise_basis, standardize
from .criteria import CriterionKind, CriterionProfile, build_profile, select_model
from .simlab import SimConfig, CurveConfig, SuccessTable, run_success_experiment, run_criterion_experiments, criterion_curves

__all__ = [
    "__version__",
    "EvidenciaError",
    "ConfigManager",
    "BasisSpec",
    "Dataset",
    "fit",
    "fit_profile",
    "noise_basis",
    "standardize",
    "CriterionKind",
    "CriterionProfile",
    "build_profile",
    "select_model",
    "SimConfig",
    "CurveConfig",
    "SuccessTable",
    "run_success_experiment",
    "run_criterion_experiments",
    "criterion_curves",
]
