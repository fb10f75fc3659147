"""
Shared pytest fixtures for the nslfa test suite.

Provides reusable fixtures for:
- Small designs (separable, overlapping, all-ones)
- Small datasets drawn from the logistic-link generator
- Hyperparameters and Gram sets at random points
- Fast fit configurations
"""

import numpy as np
import pytest

from estimator.settings import FitConfig
from gp.kernel import build_gram_set
from model.types import Dataset, DesignMatrix, Hyperparams
from optim.base import OptimOptions
from registry.scenarios import registry
from simulation.generator import gen_data


# =============================================================================
# Design Fixtures
# =============================================================================

@pytest.fixture
def q_separable():
    """Scenario-1 style: items 1-3 on factor 1, items 4-6 on factor 2."""
    return DesignMatrix(np.array([[1, 0], [1, 0], [1, 0], [0, 1], [0, 1], [0, 1]]))


@pytest.fixture
def q_overlap():
    """Scenario-2 style: second half loads on both factors."""
    return DesignMatrix(np.array([[1, 0], [1, 0], [1, 0], [1, 1], [1, 1], [1, 1]]))


@pytest.fixture
def q_mixed():
    return DesignMatrix(np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]]))


# =============================================================================
# Data Fixtures
# =============================================================================

@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_sim():
    """k2-scenario1, J=6, N=30 logistic-link draw."""
    spec = registry.get("k2-scenario1")
    q = spec.design(6)
    return q, gen_data(q, 30, spec, seed=7)


@pytest.fixture
def small_point(rng, q_overlap):
    """Random (X, A, theta, Y) with A obeying q_overlap, N=8."""
    n = 8
    x = rng.normal(size=(n, q_overlap.K))
    a = np.where(q_overlap.mask, rng.normal(size=q_overlap.q.shape), 0.0)
    y = rng.normal(size=(n, q_overlap.J))
    h = Hyperparams(w=0.8, tau=1.3, sigma2=0.4)
    return x, a, h, y


@pytest.fixture
def small_gram(small_point):
    x, a, h, y = small_point
    return build_gram_set(x, a, h, y)


@pytest.fixture
def theta():
    return Hyperparams(w=1.0, tau=1.0, sigma2=0.25)


# =============================================================================
# Config Fixtures
# =============================================================================

@pytest.fixture
def fast_cfg():
    """Short joint-MAP run for smoke tests."""
    return FitConfig(optim=OptimOptions(max_iters=60))


@pytest.fixture
def fast_iterative_cfg():
    return FitConfig(
        method="iterative",
        optim=OptimOptions(max_iters=40),
        outer_max=2,
        step2_max_iters=10,
        step2_restarts=1,
    )


@pytest.fixture
def dataset_from():
    def _make(y, labels=None):
        return Dataset(np.asarray(y, dtype=float), labels=labels)
    return _make
