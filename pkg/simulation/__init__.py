"""
Simulation module for nslfa.

Provides scenario data generators and the replication harness.
"""

from .generator import SimulatedData, gen_data, gen_gp_data, uniform_ball
from .harness import METHODS, HarnessResult, resolve_methods, run_replications, summarize

__all__ = [
    "SimulatedData",
    "gen_data",
    "gen_gp_data",
    "uniform_ball",
    "METHODS",
    "HarnessResult",
    "resolve_methods",
    "run_replications",
    "summarize",
]
