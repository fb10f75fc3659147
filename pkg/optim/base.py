"""
Shared optimizer types and coordinate masking.

A mask marks the free coordinates; fixed coordinates keep their starting
values bit-for-bit and their gradient entries are zeroed before use.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from model.errors import NonFiniteObjective, ShapeMismatch
from model.types import ConvergenceReason

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


class OptimOptions(BaseModel):
    """Stopping rules and step parameters for the first-order minimizers."""

    model_config = ConfigDict(frozen=True)

    max_iters: int = Field(default=500, ge=1, description="Iteration cap")
    grad_tol: float = Field(default=1e-5, gt=0, description="Masked gradient ∞-norm tolerance")
    obj_tol: float = Field(default=1e-9, gt=0, description="Relative objective change tolerance")
    gd_step: float = Field(default=1e-2, gt=0, description="Initial gradient-descent step")
    gd_backtrack: float = Field(default=0.5, gt=0, lt=1, description="Backtracking factor")
    gd_armijo: float = Field(default=1e-4, gt=0, lt=1, description="Armijo sufficient-decrease constant")
    scg_sigma0: float = Field(default=1e-4, gt=0, description="SCG finite-difference scale")
    scg_lambda0: float = Field(default=1e-6, gt=0, description="SCG initial regularization")
    seed: int = Field(default=0, description="Seed for stochastic restarts")


@dataclass(frozen=True)
class OptimOutcome:
    """Result of one minimization run."""

    x_final: np.ndarray
    objective_final: float
    iterations: int
    converged: ConvergenceReason
    trace: tuple[float, ...]


def check_mask(x0: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    if mask is None:
        return np.ones(x0.shape, dtype=bool)
    mask = np.asarray(mask).astype(bool)
    if mask.shape != x0.shape:
        raise ShapeMismatch(f"mask shape {mask.shape} does not match x0 shape {x0.shape}")
    return mask


def masked(grad: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, grad, 0.0)


def finite_or_raise(value: float, where: str) -> float:
    if not np.isfinite(value):
        raise NonFiniteObjective(f"objective is not finite at {where}")
    return value


def relative_change(f_new: float, f_old: float) -> float:
    return abs(f_new - f_old) / max(1.0, abs(f_old))
