"""
Cholesky factorization with a bounded jitter escalation.

The noisy Gram matrix always carries sigma2 on its diagonal, so a failed
factorization points to scaling trouble; jitter is added in small decades
and the failure surfaces once the ladder is exhausted.
"""

import logging

import numpy as np
from scipy import linalg

from config import config
from model.errors import FactorizationFailed

logger = logging.getLogger(__name__)


def jitter_ladder(start: float | None = None, stop: float | None = None) -> list[float]:
    """Relative jitter levels tried after a plain factorization fails."""
    start = config.numerics.jitter_start if start is None else start
    stop = config.numerics.jitter_stop if stop is None else stop
    levels = []
    eps = start
    while eps <= stop * (1 + 1e-9):
        levels.append(eps)
        eps *= 10.0
    return levels


def jittered_cholesky(k: np.ndarray, scale: float, label: str = "") -> tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of k, adding eps·scale to the diagonal on failure.

    Returns:
        (L, jitter) where jitter is the absolute amount added (0.0 when none).

    Raises:
        FactorizationFailed: when the largest jitter level still fails.
    """
    try:
        return linalg.cholesky(k, lower=True, check_finite=False), 0.0
    except linalg.LinAlgError:
        pass

    if not np.all(np.isfinite(k)):
        raise FactorizationFailed(f"non-finite entries in Gram matrix {label}".strip())

    eye = np.eye(k.shape[0])
    for eps in jitter_ladder():
        jitter = eps * scale
        try:
            chol = linalg.cholesky(k + jitter * eye, lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
        logger.warning(f"[Cholesky] added jitter={jitter:.3e} {label}".rstrip())
        return chol, jitter

    raise FactorizationFailed(
        f"Gram matrix {label} is not positive definite even with jitter "
        f"{config.numerics.jitter_stop:g}*{scale:g}")


def chol_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L Lᵀ) x = b given the lower factor L."""
    return linalg.cho_solve((chol, True), b, check_finite=False)


def chol_logdet(chol: np.ndarray) -> float:
    return float(2.0 * np.sum(np.log(np.diag(chol))))
