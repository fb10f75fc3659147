"""
Comparison methods: constrained linear factor analysis, the unconstrained
GP comparator and varimax rotation.
"""

from .linear_fa import LinearFaConfig, LinearFaFit, fit_linear_fa
from .unconstrained import fit_unconstrained
from .varimax import derive_design, varimax, varimax_criterion

__all__ = [
    "LinearFaConfig",
    "LinearFaFit",
    "fit_linear_fa",
    "fit_unconstrained",
    "derive_design",
    "varimax",
    "varimax_criterion",
]
