"""
Evaluation metrics for fitted factor models.

Provides the per-factor angle and correlation measures, the product and
link reconstruction errors, and nearest-neighbour classification error in
a latent embedding.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from model.errors import DegenerateVariance, MissingLabels, ShapeMismatch, TooFewRows, ZeroVector

logger = logging.getLogger(__name__)


def sin_angle(u: np.ndarray, v: np.ndarray) -> float:
    """sqrt(1 - (u·v)² / (‖u‖²‖v‖²)), clamped to [0, 1]."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ShapeMismatch(f"vectors of length {u.size} and {v.size}")
    uu, vv = float(u @ u), float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise ZeroVector("sin of the angle is undefined for a zero vector")
    cos_sq = float(u @ v) ** 2 / (uu * vv)
    return float(np.sqrt(np.clip(1.0 - cos_sq, 0.0, 1.0)))


def abs_corr(u: np.ndarray, v: np.ndarray) -> float:
    """|Pearson correlation|."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ShapeMismatch(f"vectors of length {u.size} and {v.size}")
    if np.ptp(u) == 0.0 or np.ptp(v) == 0.0:
        raise DegenerateVariance("correlation is undefined for a constant vector")
    return float(min(1.0, abs(np.corrcoef(u, v)[0, 1])))


def d_xa(x_true: np.ndarray, a_true: np.ndarray, x_hat: np.ndarray, a_hat: np.ndarray) -> float:
    """‖X*A*ᵀ - X̂Âᵀ‖_F² / (NJ)."""
    x_true, a_true = np.asarray(x_true, float), np.asarray(a_true, float)
    x_hat, a_hat = np.asarray(x_hat, float), np.asarray(a_hat, float)
    if x_true.shape[0] != x_hat.shape[0] or a_true.shape[0] != a_hat.shape[0]:
        raise ShapeMismatch(
            f"products of shape ({x_true.shape[0]}, {a_true.shape[0]}) "
            f"and ({x_hat.shape[0]}, {a_hat.shape[0]})")
    if x_true.shape[1] != a_true.shape[1] or x_hat.shape[1] != a_hat.shape[1]:
        raise ShapeMismatch("score and loading factor counts differ")
    diff = x_true @ a_true.T - x_hat @ a_hat.T
    return float(np.sum(diff * diff) / diff.size)


def d_f(f_hat: np.ndarray, f_true: np.ndarray) -> float:
    """Σ_j ‖f̂_j - f_j*‖² / (NJ)."""
    f_hat, f_true = np.asarray(f_hat, float), np.asarray(f_true, float)
    if f_hat.shape != f_true.shape:
        raise ShapeMismatch(f"link matrices of shape {f_hat.shape} and {f_true.shape}")
    diff = f_hat - f_true
    return float(np.sum(diff * diff) / diff.size)


def nn_class_error(z: np.ndarray, labels: Optional[np.ndarray]) -> int:
    """
    Number of points whose nearest other point (Euclidean, lowest index on
    ties) carries a different label.
    """
    if labels is None:
        raise MissingLabels("nearest-neighbour error needs class labels")
    z = np.asarray(z, dtype=float)
    labels = np.asarray(labels)
    if z.shape[0] < 2:
        raise TooFewRows("need at least 2 points")
    if labels.shape[0] != z.shape[0]:
        raise ShapeMismatch(f"{labels.shape[0]} labels for {z.shape[0]} points")

    dist = cdist(z, z)
    np.fill_diagonal(dist, np.inf)
    nearest = np.argmin(dist, axis=1)
    return int(np.sum(labels[nearest] != labels))


@dataclass(frozen=True)
class EvalSummary:
    """Per-factor |corr| and sin plus reconstruction errors for one fit."""

    corr: tuple[float, ...]
    sin: tuple[float, ...]
    d_xa: float
    d_f: Optional[float] = None
    nn_error: Optional[int] = None

    @property
    def mean_abs_corr(self) -> float:
        return float(np.mean(self.corr))

    @property
    def mean_sin(self) -> float:
        return float(np.mean(self.sin))

    def as_row(self) -> dict:
        row = {f"corr_x{k + 1}": c for k, c in enumerate(self.corr)}
        row.update({f"sin_x{k + 1}": s for k, s in enumerate(self.sin)})
        row.update({"d_xa": self.d_xa, "d_f": self.d_f})
        return row

    def as_dict(self) -> dict:
        return asdict(self)


def _safe(fn, u, v) -> float:
    try:
        return fn(u, v)
    except (ZeroVector, DegenerateVariance):
        return float("nan")


def evaluate(
    x_true: np.ndarray,
    a_true: np.ndarray,
    x_hat: np.ndarray,
    a_hat: np.ndarray,
    f_true: Optional[np.ndarray] = None,
    f_hat: Optional[np.ndarray] = None,
) -> EvalSummary:
    """
    Compare estimates with truth column by column.

    Factor k of the estimate is paired with factor k of the truth; a
    degenerate estimated column yields NaN for that factor.
    """
    x_true, x_hat = np.asarray(x_true, float), np.asarray(x_hat, float)
    if x_true.shape != x_hat.shape:
        raise ShapeMismatch(f"scores of shape {x_true.shape} and {x_hat.shape}")
    n_factors = x_true.shape[1]
    corr = tuple(_safe(abs_corr, x_true[:, k], x_hat[:, k]) for k in range(n_factors))
    sin = tuple(_safe(sin_angle, x_true[:, k], x_hat[:, k]) for k in range(n_factors))
    link_error = None
    if f_true is not None and f_hat is not None:
        link_error = d_f(f_hat, f_true)
    return EvalSummary(
        corr=corr,
        sin=sin,
        d_xa=d_xa(x_true, a_true, x_hat, a_hat),
        d_f=link_error,
    )
