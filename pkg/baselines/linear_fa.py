"""
Constrained linear factor analysis by alternating least squares.

Minimizes ‖Y - M - X Aᵀ‖² + ridge·‖X‖² with each loading row solved only over
the coordinates the design leaves free. M holds the column means when
centering is on (the default) and zeros otherwise.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from estimator.initialization import pca_init
from model.design import apply_zero_pattern
from model.errors import DimensionMismatch, SingularSubproblem
from model.types import ConvergenceReason, Dataset, DesignMatrix, FactorScores, Loadings

logger = logging.getLogger(__name__)


class LinearFaConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    ridge: float = Field(default=1e-6, gt=0)
    rel_tol: float = Field(default=1e-8, gt=0)
    abs_tol: float = Field(default=1e-20, ge=0)
    max_iters: int = Field(default=500, ge=1)
    center: bool = Field(default=True, description="Remove column means before the alternating solves")


@dataclass(frozen=True)
class LinearFaFit:
    x_hat: FactorScores
    a_hat: Loadings
    sigma2_hat: float
    objective_trace: tuple[float, ...]
    converged: ConvergenceReason
    iterations: int
    means: Optional[np.ndarray] = None

    @property
    def f_hat(self) -> np.ndarray:
        """Fitted means X̂Âᵀ plus the column means, the linear counterpart of the posterior link means."""
        fitted = self.x_hat.x @ self.a_hat.a.T
        return fitted if self.means is None else fitted + self.means


def _objective(y: np.ndarray, x: np.ndarray, a: np.ndarray, ridge: float) -> float:
    resid = y - x @ a.T
    return float(np.sum(resid * resid) + ridge * np.sum(x * x))


def _solve_scores(y: np.ndarray, a: np.ndarray, ridge: float) -> np.ndarray:
    gram = a.T @ a + ridge * np.eye(a.shape[1])
    return np.linalg.solve(gram, a.T @ y.T).T


def _solve_loadings(y: np.ndarray, x: np.ndarray, q: DesignMatrix) -> np.ndarray:
    a = np.zeros((q.J, q.K))
    for j in range(q.J):
        free = np.flatnonzero(q.mask[j])
        sub = x[:, free]
        coef, _, rank, _ = np.linalg.lstsq(sub, y[:, j], rcond=None)
        if rank < free.size:
            raise SingularSubproblem(
                f"loading row j={j}: score columns {free.tolist()} have rank {rank} < {free.size}")
        a[j, free] = coef
    return a


def fit_linear_fa(
    y: Dataset,
    q: DesignMatrix,
    cfg: Optional[LinearFaConfig] = None,
    init: Optional[tuple[FactorScores, Loadings]] = None,
) -> LinearFaFit:
    """
    Fit the constrained linear factor model from PCA starting values.

    Raises:
        DimensionMismatch: data columns differ from design rows
        SingularSubproblem: a loading subproblem is rank deficient
    """
    cfg = cfg or LinearFaConfig()
    if y.J != q.J:
        raise DimensionMismatch(f"data has J={y.J} columns but the design has {q.J} rows")

    means = y.y.mean(axis=0) if cfg.center else np.zeros(y.J)
    data = y.y - means
    x0, a0 = init if init is not None else pca_init(y, q)
    x, a = np.array(x0.x), np.array(a0.a)
    trace = [_objective(data, x, a, cfg.ridge)]
    reason = ConvergenceReason.MAX_ITERS
    iterations = 0

    for it in range(cfg.max_iters):
        iterations = it + 1
        x = _solve_scores(data, a, cfg.ridge)
        a = _solve_loadings(data, x, q)
        value = _objective(data, x, a, cfg.ridge)
        previous = trace[-1]
        trace.append(value)
        if value <= cfg.abs_tol or abs(previous - value) <= cfg.rel_tol * max(abs(previous), 1e-300):
            reason = ConvergenceReason.OBJ_TOL
            break

    resid = data - x @ a.T
    sigma2 = float(np.mean(resid * resid))
    logger.info(
        f"[LinearFA] N={y.N} J={y.J} K={q.K} iterations={iterations} "
        f"reason={reason.value} objective={trace[-1]:.6g} sigma2={sigma2:.4g}"
    )
    return LinearFaFit(
        x_hat=FactorScores(x),
        a_hat=apply_zero_pattern(a, q),
        sigma2_hat=sigma2,
        objective_trace=tuple(trace),
        converged=reason,
        iterations=iterations,
        means=means,
    )
