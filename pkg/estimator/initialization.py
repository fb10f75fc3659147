"""
Starting values for scores, loadings and hyperparameters.

Scores start at the leading principal components of the centered data,
scaled to unit sample variance; loadings are the matching PCA loadings,
masked by the design.
"""

import logging

import numpy as np
from sklearn.decomposition import PCA

from config import config
from model.design import apply_zero_pattern
from model.errors import RankDeficient, TooFewRows
from model.types import Dataset, DesignMatrix, FactorScores, Hyperparams, Loadings

logger = logging.getLogger(__name__)

DEAD_LOADING_NUDGE = 0.1
RANK_TOL = 1e-10


def pca_init(y: Dataset, q: DesignMatrix) -> tuple[FactorScores, Loadings]:
    """
    First K principal-component scores (unit variance) and masked loadings.

    The sign of each component is fixed so its largest-magnitude score is
    positive. Free loadings that come out exactly zero are nudged to +0.1.

    Raises:
        TooFewRows: N <= K
        RankDeficient: fewer than K nonzero singular values after centering
    """
    n, n_factors = y.N, q.K
    if n <= n_factors:
        raise TooFewRows(f"PCA initialization needs N > K, got N={n}, K={n_factors}")
    if n_factors > min(n, y.J):
        raise RankDeficient(f"cannot extract K={n_factors} components from a {n}×{y.J} matrix")

    centered = y.y - y.y.mean(axis=0)
    pca = PCA(n_components=n_factors, svd_solver="full")
    scores = pca.fit_transform(centered)

    singular = pca.singular_values_
    nonzero = 0 if singular[0] <= 0 else int(np.sum(singular > RANK_TOL * singular[0]))
    if nonzero < n_factors:
        raise RankDeficient(
            f"only {nonzero} nonzero singular values after centering, need K={n_factors}")

    scale = scores.std(axis=0, ddof=1)
    x0 = scores / scale
    a0 = pca.components_.T * scale

    largest = np.argmax(np.abs(x0), axis=0)
    signs = np.sign(x0[largest, np.arange(n_factors)])
    signs[signs == 0] = 1.0
    x0 = x0 * signs
    a0 = a0 * signs

    a0 = np.where(q.mask, a0, 0.0)
    dead = q.mask & (np.abs(a0) < 1e-12)
    a0[dead] += DEAD_LOADING_NUDGE

    logger.info(
        f"[PCAInit] N={n} J={y.J} K={n_factors} "
        f"explained={float(np.sum(pca.explained_variance_ratio_)):.3f} nudged={int(dead.sum())}"
    )
    return FactorScores(x0), apply_zero_pattern(a0, q)


def theta_init(y: Dataset) -> Hyperparams:
    """w = 1 and var(Y) split equally between tau and sigma2."""
    var = float(np.var(y.y))
    if var <= 0:
        var = 1.0
    return Hyperparams(w=1.0, tau=var / 2.0, sigma2=var / 2.0)


def sigma2_floor(y: Dataset) -> float:
    var = float(np.var(y.y))
    return config.numerics.sigma2_floor_ratio * (var if var > 0 else 1.0)
