"""
Optimization module for nslfa.

Provides masked first-order minimizers shared by both estimation paths.
"""

from .base import OptimOptions, OptimOutcome
from .gd import gd_minimize
from .scg import scg_minimize

__all__ = [
    "OptimOptions",
    "OptimOutcome",
    "gd_minimize",
    "scg_minimize",
]
