"""
Registry module initialization.

This module contains the scenario registry and the document schemas.
"""

from registry.scenarios import ScenarioRegistry, ScenarioSpec, gen_design, registry
from registry.schemas import FitDocument, ReplicationRecord, RunManifest, RunSettings

__all__ = [
    "ScenarioRegistry",
    "ScenarioSpec",
    "gen_design",
    "registry",
    "FitDocument",
    "ReplicationRecord",
    "RunManifest",
    "RunSettings",
]
