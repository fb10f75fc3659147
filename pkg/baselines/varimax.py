"""
Varimax rotation and threshold-derived designs.
"""

import logging

import numpy as np

from model.errors import ShapeMismatch
from model.types import DesignMatrix

logger = logging.getLogger(__name__)

CRITERION_TOL = 1e-10
MAX_SWEEPS = 1000


def varimax_criterion(a: np.ndarray) -> float:
    """Σ_k [Σ_j a_jk⁴ - (Σ_j a_jk²)² / J]."""
    sq = a * a
    return float(np.sum(np.sum(sq * sq, axis=0) - np.sum(sq, axis=0) ** 2 / a.shape[0]))


def _pair_angle(x: np.ndarray, y: np.ndarray) -> float:
    """Rotation angle maximizing the criterion over one column pair."""
    n = x.size
    u = x * x - y * y
    v = 2.0 * x * y
    big_a, big_b = u.sum(), v.sum()
    big_c = np.sum(u * u - v * v)
    big_d = 2.0 * np.sum(u * v)
    num = big_d - 2.0 * big_a * big_b / n
    den = big_c - (big_a * big_a - big_b * big_b) / n
    return 0.25 * float(np.arctan2(num, den))


def varimax(a: np.ndarray, return_trace: bool = False):
    """
    Orthogonal rotation maximizing the varimax criterion by pairwise sweeps.

    Returns:
        (rotated, R) with rotated = a @ R; with return_trace, the criterion
        after each sweep is appended as a third element.

    Raises:
        ShapeMismatch: fewer than two columns
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ShapeMismatch(f"varimax needs a J×K matrix with K >= 2, got shape {a.shape}")

    n_factors = a.shape[1]
    rotated = a.copy()
    rot = np.eye(n_factors)
    trace = [varimax_criterion(rotated)]

    for sweep in range(MAX_SWEEPS):
        for p in range(n_factors - 1):
            for r in range(p + 1, n_factors):
                phi = _pair_angle(rotated[:, p], rotated[:, r])
                if phi == 0.0:
                    continue
                c, s = np.cos(phi), np.sin(phi)
                plane = np.array([[c, -s], [s, c]])
                rotated[:, [p, r]] = rotated[:, [p, r]] @ plane
                rot[:, [p, r]] = rot[:, [p, r]] @ plane
        trace.append(varimax_criterion(rotated))
        if abs(trace[-1] - trace[-2]) <= CRITERION_TOL:
            break

    logger.debug(f"[Varimax] sweeps={len(trace) - 1} criterion={trace[-1]:.6g}")
    if return_trace:
        return rotated, rot, trace
    return rotated, rot


def derive_design(a: np.ndarray, threshold: float = 0.3) -> DesignMatrix:
    """
    Keep loadings with |a_jk| >= threshold · max_k |a_jk| per row.

    A row whose loadings are all zero keeps every factor.
    """
    mag = np.abs(np.asarray(a, dtype=float))
    row_max = mag.max(axis=1, keepdims=True)
    keep = mag >= threshold * row_max
    keep[row_max[:, 0] == 0] = True
    q = DesignMatrix(keep.astype(int))
    logger.info(f"[Varimax] derived design threshold={threshold} free={int(keep.sum())}/{keep.size}")
    return q
