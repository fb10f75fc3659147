"""
Model module for nslfa.

Provides the domain types, the error hierarchy and the zero-pattern helpers.
"""

from .design import apply_zero_pattern, check_zero_pattern, validate_design
from .types import (
    ConvergenceReason,
    Dataset,
    DesignMatrix,
    FactorScores,
    FitResult,
    Hyperparams,
    Loadings,
)

__all__ = [
    "apply_zero_pattern",
    "check_zero_pattern",
    "validate_design",
    "ConvergenceReason",
    "Dataset",
    "DesignMatrix",
    "FactorScores",
    "FitResult",
    "Hyperparams",
    "Loadings",
]
