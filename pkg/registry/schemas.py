"""
Pydantic schemas for nslfa documents.

Defines the fit-result document, the run manifest, per-replication records
and the run-settings file read by --config.
"""

from datetime import datetime
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import VERSION
from estimator.settings import FitConfig
from model.types import FitResult

SCHEMA_VERSION = "1"


# =============================================================================
# Fit Result
# =============================================================================

class FitDocument(BaseModel):
    """
    Serialized fit result.

    Arrays are nested lists in row-major order; indices in the document are
    the 0-based array positions.
    """

    schema_version: str = Field(default=SCHEMA_VERSION)
    method: str = Field(..., description="joint-map, iterative or unconstrained")
    N: int
    J: int
    K: int
    x_hat: list[list[float]] = Field(..., description="N×K factor scores")
    a_hat: list[list[float]] = Field(..., description="J×K loadings, zero where the design is 0")
    theta: dict[str, float] = Field(..., description="w, tau, sigma2")
    f_hat: list[list[float]] = Field(..., description="N×J posterior link means at the training indices")
    offsets: list[float] = Field(default_factory=list, description="Column means removed before fitting")
    design: list[list[int]]
    objective_trace: list[tuple[int, float]]
    converged: str
    iterations: int
    marginal_loglik: float
    bounds: dict[str, Any] = Field(default_factory=dict)
    config: dict[str, Any] = Field(default_factory=dict, description="Effective fit configuration")
    seed: int = 0
    manifest: Optional[str] = Field(default=None, description="Manifest file that produced this document")

    @classmethod
    def from_fit(
        cls,
        fit: FitResult,
        design: np.ndarray,
        marginal_loglik: float,
        cfg: FitConfig,
        manifest: Optional[str] = None,
    ) -> "FitDocument":
        return cls(
            method=fit.method,
            N=fit.x_hat.x.shape[0],
            J=fit.a_hat.a.shape[0],
            K=fit.a_hat.a.shape[1],
            x_hat=fit.x_hat.x.tolist(),
            a_hat=fit.a_hat.a.tolist(),
            theta=fit.theta_hat.as_dict(),
            f_hat=fit.f_hat.tolist(),
            offsets=fit.offsets.tolist(),
            design=np.asarray(design).astype(int).tolist(),
            objective_trace=[(int(i), float(v)) for i, v in fit.objective_trace],
            converged=fit.converged.value,
            iterations=fit.iterations,
            marginal_loglik=float(marginal_loglik),
            bounds=fit.bounds_report(),
            config=cfg.model_dump(mode="json"),
            seed=cfg.seed,
            manifest=manifest,
        )


# =============================================================================
# Run Manifest
# =============================================================================

class RunManifest(BaseModel):
    """Provenance of one CLI invocation."""

    schema_version: str = Field(default=SCHEMA_VERSION)
    command: str
    argv: list[str] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict, description="Effective configuration echo")
    seed: Optional[int] = None
    version: str = Field(default=VERSION)
    started_at: datetime
    finished_at: Optional[datetime] = None
    inputs: dict[str, str] = Field(default_factory=dict, description="Input path -> SHA-256 hex digest")
    outputs: list[str] = Field(default_factory=list)


# =============================================================================
# Replications
# =============================================================================

class ReplicationRecord(BaseModel):
    """One method fitted on one generated dataset."""

    scenario: str
    J: int
    N: int
    rep: int
    seed: int
    method: str
    status: str
    error: Optional[str] = None
    metrics: dict[str, Optional[float]] = Field(default_factory=dict)
    manifest: Optional[str] = None

    @classmethod
    def from_record(cls, record: dict, manifest: Optional[str] = None) -> "ReplicationRecord":
        known = set(cls.model_fields) - {"metrics", "manifest"}
        metrics = {
            k: (None if v is None or (isinstance(v, float) and np.isnan(v)) else float(v))
            for k, v in record.items()
            if k not in known
        }
        return cls(**{k: record[k] for k in known if k in record}, metrics=metrics, manifest=manifest)


# =============================================================================
# Settings File
# =============================================================================

class ScenarioOverrides(BaseModel):
    """Scenario fields a settings file may override."""

    model_config = ConfigDict(extra="forbid")

    j_values: Optional[list[int]] = None
    reps: Optional[int] = Field(default=None, ge=0)
    methods: Optional[list[str]] = None
    seed: Optional[int] = None
    n_per_item: Optional[int] = Field(default=None, ge=1)
    sigma2_true: Optional[float] = Field(default=None, gt=0)
    radius: Optional[float] = Field(default=None, gt=0)


class OilSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    subsample: Optional[int] = Field(default=None, ge=2)
    threshold: float = Field(default=0.3, ge=0, le=1)
    K: int = Field(default=2, ge=2)


class RunSettings(BaseModel):
    """Contents of a --config file (TOML or JSON)."""

    model_config = ConfigDict(extra="forbid")

    fit: FitConfig = Field(default_factory=FitConfig)
    simulate: ScenarioOverrides = Field(default_factory=ScenarioOverrides)
    oil: OilSettings = Field(default_factory=OilSettings)
