"""
Design validation and zero-pattern machinery.

The zero pattern of a design matrix is the only constraint placed on the
loadings; every estimator enforces it through these helpers.
"""

import numpy as np

from model.errors import EmptyMatrix, ShapeMismatch, ZeroPatternViolated
from model.types import DesignMatrix, Loadings


def validate_design(raw) -> DesignMatrix:
    """Build a DesignMatrix from a rectangular integer matrix, checking its invariants."""
    try:
        q = np.asarray(raw)
    except ValueError as exc:
        raise EmptyMatrix(f"design matrix is not rectangular: {exc}") from exc
    if q.dtype == object:
        raise EmptyMatrix("design matrix is not rectangular")
    if q.ndim == 1 and q.size:
        q = q.reshape(1, -1)
    return DesignMatrix(q)


def apply_zero_pattern(a: np.ndarray, q: DesignMatrix) -> Loadings:
    """Set a[j, k] to exactly 0 wherever q[j, k] = 0; other entries are unchanged."""
    a = np.asarray(a, dtype=float)
    if a.shape != q.q.shape:
        raise ShapeMismatch(f"loadings shape {a.shape} does not match design {q.q.shape}")
    return Loadings(np.where(q.mask, a, 0.0))


def check_zero_pattern(a: np.ndarray, q: DesignMatrix) -> None:
    """Raise ZeroPatternViolated if any constrained loading is nonzero."""
    a = np.asarray(a, dtype=float)
    if a.shape != q.q.shape:
        raise ShapeMismatch(f"loadings shape {a.shape} does not match design {q.q.shape}")
    bad = np.argwhere((~q.mask) & (a != 0.0))
    if bad.size:
        j, k = bad[0]
        raise ZeroPatternViolated(
            f"loading ({j}, {k}) = {a[j, k]} but the design fixes it at 0")
