"""
Synthetic data for the simulation scenarios.

Scores are uniform on the K-ball, free loadings uniform on the ball of
their own dimension, links logistic and noise Gaussian.
"""

import logging
from typing import NamedTuple

import numpy as np
from scipy import linalg

from gp.kernel import index_covariance
from model.errors import DegenerateDraw
from model.types import Dataset, DesignMatrix, FactorScores, Hyperparams, Loadings
from registry.scenarios import ScenarioSpec

logger = logging.getLogger(__name__)

GAMMA_MIN = 0.05
MAX_SCORE_ATTEMPTS = 10
MAX_LOADING_ATTEMPTS = 10_000


class SimulatedData(NamedTuple):
    dataset: Dataset
    x_true: np.ndarray
    a_true: np.ndarray
    f_true: np.ndarray


def uniform_ball(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """n points uniform on the dim-dimensional ball of the given radius."""
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / dim)
    return direction * r


def logistic(t: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-t))


def gamma_proxy(x: np.ndarray) -> float:
    """Smallest singular value of X over sqrt(N)."""
    return float(np.linalg.svd(x, compute_uv=False)[-1] / np.sqrt(x.shape[0]))


def sample_scores(rng: np.random.Generator, n: int, n_factors: int, radius: float) -> np.ndarray:
    """
    Raises:
        DegenerateDraw: the score matrix failed the conditioning check every attempt
    """
    for attempt in range(MAX_SCORE_ATTEMPTS):
        x = uniform_ball(rng, n, n_factors, radius)
        gamma = gamma_proxy(x)
        if gamma > GAMMA_MIN:
            return x
        logger.warning(f"[Generator] resampling scores attempt={attempt + 1} gamma={gamma:.4f}")
    raise DegenerateDraw(
        f"score draw failed sigma_K(X)/sqrt(N) > {GAMMA_MIN} in {MAX_SCORE_ATTEMPTS} attempts")


def sample_loadings(
    rng: np.random.Generator, q: DesignMatrix, radius: float, min_free: float
) -> np.ndarray:
    """Free sub-vectors uniform on their own ball, rejecting entries below min_free in magnitude."""
    a = np.zeros((q.J, q.K))
    for j in range(q.J):
        free = np.flatnonzero(q.mask[j])
        for _ in range(MAX_LOADING_ATTEMPTS):
            draw = uniform_ball(rng, 1, free.size, radius)[0]
            if np.all(np.abs(draw) >= min_free):
                a[j, free] = draw
                break
        else:
            raise DegenerateDraw(f"loading row j={j}: no draw with every free entry >= {min_free}")
    return a


def gen_data(q: DesignMatrix, N: int, spec: ScenarioSpec, seed: int) -> SimulatedData:
    """
    Draw (Y, X*, A*, F*) for a design under the scenario's settings.

    Raises:
        DegenerateDraw: the score or loading draw could not be completed
    """
    rng = np.random.default_rng(seed)
    x = sample_scores(rng, N, q.K, spec.radius)
    a = sample_loadings(rng, q, spec.radius, spec.min_free_loading)
    f = logistic(x @ a.T)
    y = f + rng.normal(0.0, np.sqrt(spec.sigma2_true), size=f.shape)
    logger.debug(f"[Generator] N={N} J={q.J} K={q.K} seed={seed} scenario={spec.name}")
    return SimulatedData(Dataset(y), x, a, f)


def gen_gp_data(
    x: np.ndarray, a: np.ndarray, h: Hyperparams, seed: int
) -> tuple[Dataset, np.ndarray]:
    """
    Draw Y from the GP model itself: f_j ~ N(0, C_j) on the indices X a_j, plus noise sigma2.

    Returns:
        (dataset, f_true)
    """
    rng = np.random.default_rng(seed)
    x = FactorScores(x).x
    a = Loadings(a).a
    t = x @ a.T
    f = np.empty_like(t)
    for j in range(t.shape[1]):
        # eigh tolerates the near-singular covariance of a smooth kernel
        evals, evecs = linalg.eigh(index_covariance(t[:, j], h))
        f[:, j] = evecs @ (np.sqrt(np.clip(evals, 0.0, None)) * rng.standard_normal(t.shape[0]))
    y = f + rng.normal(0.0, np.sqrt(h.sigma2), size=f.shape)
    return Dataset(y), f
