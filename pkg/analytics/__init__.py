"""
Analytics module for nslfa.

Provides the structural identifiability checker and the evaluation metrics.
"""

from .identifiability import (
    IdentifiabilityReport,
    factor_identifiable,
    identifiability_report,
    r_q,
)
from .metrics import EvalSummary, abs_corr, d_f, d_xa, evaluate, nn_class_error, sin_angle

__all__ = [
    "IdentifiabilityReport",
    "factor_identifiable",
    "identifiability_report",
    "r_q",
    "EvalSummary",
    "abs_corr",
    "d_f",
    "d_xa",
    "evaluate",
    "nn_class_error",
    "sin_angle",
]
