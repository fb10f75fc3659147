"""
Scenario Registry.

Registers the simulation designs with their generation settings. Each
scenario has:
- name: Unique identifier (e.g. "k2-scenario1")
- patterns: Row patterns as 1-based factor sets
- layout: "blocked" (each pattern fills a contiguous block) or "cyclic"
- j_schedule: Default item counts for the replication harness
- expected: Per-factor identifiability verdicts of the design family

Lookups of unknown names fail with close-match suggestions.
"""

import logging
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from rapidfuzz import fuzz, process

from model.errors import IndivisibleJ, UnknownScenario
from model.types import DesignMatrix

logger = logging.getLogger(__name__)

__all__ = ["ScenarioSpec", "ScenarioRegistry", "registry", "gen_design"]


class ScenarioSpec(BaseModel):
    """Design family and data-generation settings for one simulation scenario."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    K: int = Field(..., ge=1)
    patterns: tuple[tuple[int, ...], ...]
    layout: Literal["blocked", "cyclic"] = "cyclic"
    j_schedule: tuple[int, ...] = ()
    n_per_item: int = Field(default=5, ge=1, description="N = n_per_item · J")
    sigma2_true: float = Field(default=0.25, gt=0)
    radius: float = Field(default=2.5, gt=0)
    min_free_loading: float = Field(default=0.1, ge=0)
    link: Literal["logistic"] = "logistic"
    replications: int = Field(default=20, ge=0)
    full_replications: int = Field(default=100, ge=0)
    seed: int = 0
    expected: tuple[bool, ...] = ()
    description: str = ""

    @field_validator("patterns")
    @classmethod
    def _patterns_in_range(cls, value, info):
        n_factors = info.data.get("K")
        for pattern in value:
            if not pattern:
                raise ValueError("empty row pattern")
            if n_factors is not None and not all(1 <= k <= n_factors for k in pattern):
                raise ValueError(f"pattern {pattern} has factors outside 1..{n_factors}")
        return value

    @property
    def blocks(self) -> int:
        return len(self.patterns)

    def n_for(self, J: int) -> int:
        return self.n_per_item * J

    def design(self, J: int) -> DesignMatrix:
        """
        Build the J×K design for this scenario.

        Raises:
            IndivisibleJ: J is not a positive multiple of the block count
        """
        if J <= 0 or J % self.blocks:
            raise IndivisibleJ(f"{self.name}: J={J} is not a positive multiple of {self.blocks}")
        rows = np.zeros((self.blocks, self.K), dtype=int)
        for b, pattern in enumerate(self.patterns):
            rows[b, [k - 1 for k in pattern]] = 1
        if self.layout == "blocked":
            order = np.repeat(np.arange(self.blocks), J // self.blocks)
        else:
            order = np.arange(J) % self.blocks
        return DesignMatrix(rows[order])


class ScenarioRegistry:
    """
    Central registry of simulation scenarios.

    Usage:
        registry = ScenarioRegistry()
        spec = registry.get("k2-scenario1")
        q = spec.design(10)
    """

    def __init__(self) -> None:
        self._scenarios: dict[str, ScenarioSpec] = {}
        self._register_all()

    def _register_all(self) -> None:
        self._register_k2()
        self._register_k3()
        self._register_k5()

    # =========================================================================
    # K = 2
    # =========================================================================

    def _register_k2(self) -> None:
        self.register(ScenarioSpec(
            name="k2-scenario1",
            K=2,
            patterns=((1,), (2,)),
            layout="blocked",
            j_schedule=(6, 10, 20),
            expected=(True, True),
            description="each item loads on exactly one factor",
        ))
        self.register(ScenarioSpec(
            name="k2-scenario2",
            K=2,
            patterns=((1,), (1, 2)),
            layout="blocked",
            j_schedule=(6, 10, 20),
            expected=(True, False),
            description="second half of the items loads on both factors",
        ))

    # =========================================================================
    # K = 3
    # =========================================================================

    def _register_k3(self) -> None:
        self.register(ScenarioSpec(
            name="k3-scenario1",
            K=3,
            patterns=((1, 2), (1, 3), (2, 3)),
            j_schedule=(6, 12, 21),
            expected=(True, True, True),
            description="mixed structure, every item loads on two factors",
        ))
        self.register(ScenarioSpec(
            name="k3-scenario2",
            K=3,
            patterns=((1,), (1, 3), (2, 3)),
            j_schedule=(6, 12, 21),
            expected=(True, False, True),
            description="factor 2 never appears without factor 3",
        ))

    # =========================================================================
    # K = 5
    # =========================================================================

    def _register_k5(self) -> None:
        self.register(ScenarioSpec(
            name="k5-scenario1",
            K=5,
            patterns=((1, 2, 3), (2, 3, 4), (3, 4, 5), (1, 4, 5), (1, 2, 5)),
            j_schedule=(10, 20, 30),
            expected=(True, True, True, True, True),
            description="mixed structure, every item loads on three consecutive factors",
        ))
        self.register(ScenarioSpec(
            name="k5-scenario2",
            K=5,
            patterns=((1, 2, 3, 4), (2, 3, 4), (3, 4, 5), (1, 4, 5), (1, 2, 5)),
            j_schedule=(10, 20, 30),
            expected=(True, True, False, True, True),
            description="factor 3 never appears without factor 4",
        ))

    # =========================================================================
    # Lookup
    # =========================================================================

    def register(self, spec: ScenarioSpec) -> None:
        self._scenarios[spec.name] = spec
        logger.debug(f"[Scenarios] registered name={spec.name} K={spec.K}")

    def names(self) -> list[str]:
        return sorted(self._scenarios)

    def list_scenarios(self) -> list[ScenarioSpec]:
        return [self._scenarios[name] for name in self.names()]

    def suggest(self, name: str, limit: int = 3) -> list[str]:
        matches = process.extract(name, self.names(), scorer=fuzz.WRatio, limit=limit)
        return [match for match, score, _ in matches if score >= 50]

    def get(self, name: str) -> ScenarioSpec:
        """
        Raises:
            UnknownScenario: name is not registered; the message lists close matches
        """
        spec = self._scenarios.get(name)
        if spec is None:
            hints = self.suggest(name)
            hint = f" (did you mean: {', '.join(hints)}?)" if hints else ""
            raise UnknownScenario(f"unknown scenario '{name}'{hint}")
        return spec

    def __contains__(self, name: str) -> bool:
        return name in self._scenarios


registry = ScenarioRegistry()


def gen_design(scenario: str, J: int, scenarios: Optional[ScenarioRegistry] = None) -> DesignMatrix:
    """J×K design of a registered scenario."""
    return (scenarios or registry).get(scenario).design(J)
