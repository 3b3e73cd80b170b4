"""Sharp bounds on expectations of generalized order statistics for DFR and DFRA parents."""

from .dfr_bounds import BoundResult, Case, DfrClass, classify_dfr, dfr_bound
from .dfra_bounds import alpha0, bound_dfra, dfra_admissible
from .errors import GosBoundsError, InvalidParameters, NumericalFailure, UnsupportedByTheory
from .extremal import ExtremalDistribution, MomentSpec
from .numerics import Tolerances
from .params import GosParams, KRecords, OrderStatistics, ProgressiveCensoring, from_model, new_params

__version__ = "0.1.0"

__all__ = [
    "BoundResult", "Case", "DfrClass", "ExtremalDistribution", "GosBoundsError", "GosParams",
    "InvalidParameters", "KRecords", "MomentSpec", "NumericalFailure", "OrderStatistics",
    "ProgressiveCensoring", "Tolerances", "UnsupportedByTheory", "alpha0", "bound_dfra",
    "classify_dfr", "dfr_bound", "dfra_admissible", "from_model", "new_params",
]
