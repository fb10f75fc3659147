"""
Comparison methods: constrained linear FA, the unconstrained GP fit and varimax.
"""

import numpy as np
import pytest

from analytics.metrics import d_xa
from baselines import (
    LinearFaConfig,
    derive_design,
    fit_linear_fa,
    fit_unconstrained,
    varimax,
    varimax_criterion,
)
from estimator import FitConfig, fit_joint_map
from model.errors import DimensionMismatch, ShapeMismatch
from model.types import Dataset, DesignMatrix
from optim.base import OptimOptions


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


# ── Linear factor analysis ──

class TestLinearFa:
    @pytest.fixture
    def noiseless(self, rng, q_separable):
        x = rng.normal(size=(30, 2))
        x -= x.mean(axis=0)
        a = np.where(q_separable.mask, rng.uniform(0.5, 1.5, size=(6, 2)), 0.0)
        return x, a, Dataset(x @ a.T)

    def test_noiseless_recovery(self, noiseless, q_separable):
        x, a, y = noiseless
        result = fit_linear_fa(y, q_separable)
        assert d_xa(x, a, result.x_hat.x, result.a_hat.a) <= 1e-6

    def test_zero_pattern_exact(self, small_sim):
        q, data = small_sim
        result = fit_linear_fa(data.dataset, q)
        assert np.all(result.a_hat.a[~q.mask] == 0.0)

    def test_objective_non_increasing(self, small_sim):
        q, data = small_sim
        trace = np.array(fit_linear_fa(data.dataset, q).objective_trace)
        assert np.all(np.diff(trace) <= 1e-10 * trace[:-1])

    def test_iteration_cap(self, small_sim):
        q, data = small_sim
        result = fit_linear_fa(data.dataset, q, LinearFaConfig(max_iters=2))
        assert result.iterations <= 2
        assert len(result.objective_trace) == result.iterations + 1

    def test_fitted_means(self, small_sim):
        q, data = small_sim
        result = fit_linear_fa(data.dataset, q)
        means = data.dataset.y.mean(axis=0)
        np.testing.assert_allclose(result.means, means)
        np.testing.assert_allclose(result.f_hat, result.x_hat.x @ result.a_hat.a.T + means)
        assert result.sigma2_hat > 0

    def test_column_shift_only_moves_means(self, small_sim):
        q, data = small_sim
        shift = np.arange(1.0, 7.0) * 3.0
        base = fit_linear_fa(data.dataset, q)
        shifted = fit_linear_fa(Dataset(data.dataset.y + shift), q)
        np.testing.assert_allclose(shifted.x_hat.x, base.x_hat.x, atol=1e-6)
        np.testing.assert_allclose(shifted.means, base.means + shift)

    def test_uncentered_fit(self, small_sim):
        q, data = small_sim
        result = fit_linear_fa(data.dataset, q, LinearFaConfig(center=False))
        np.testing.assert_array_equal(result.means, np.zeros(6))
        np.testing.assert_allclose(result.f_hat, result.x_hat.x @ result.a_hat.a.T)

    def test_dimension_mismatch(self, small_sim):
        _, data = small_sim
        with pytest.raises(DimensionMismatch):
            fit_linear_fa(data.dataset, DesignMatrix.ones(4, 2))


# ── Unconstrained comparator ──

class TestUnconstrained:
    def test_matches_joint_map_with_full_design(self, small_sim):
        _, data = small_sim
        cfg = FitConfig(optim=OptimOptions(max_iters=15))
        baseline = fit_unconstrained(data.dataset, 2, cfg)
        direct = fit_joint_map(data.dataset, DesignMatrix.ones(6, 2), cfg)
        assert baseline.method == "unconstrained"
        np.testing.assert_array_equal(baseline.x_hat.x, direct.x_hat.x)
        np.testing.assert_array_equal(baseline.a_hat.a, direct.a_hat.a)


# ── Varimax ──

class TestVarimax:
    def test_simple_structure_is_fixed_point(self):
        a = np.array([[1.0, 0.0], [0.8, 0.0], [0.0, 1.0], [0.0, 0.6]])
        rotated, rot = varimax(a)
        np.testing.assert_allclose(rot, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(rotated, a, atol=1e-12)

    def test_rotation_is_orthogonal(self, rng):
        a = rng.normal(size=(10, 4))
        rotated, rot = varimax(a)
        np.testing.assert_allclose(rot.T @ rot, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(rotated, a @ rot, atol=1e-10)

    def test_recovers_rotated_simple_structure(self):
        a = np.array([[1.0, 0.0], [0.8, 0.0], [0.0, 1.0], [0.0, 0.6]])
        rotated, _ = varimax(a @ rotation(np.pi / 6))
        smallest = np.sort(np.abs(rotated), axis=1)[:, 0]
        assert np.all(smallest <= 1e-6)

    def test_criterion_non_decreasing(self, rng):
        _, _, trace = varimax(rng.normal(size=(12, 3)), return_trace=True)
        assert np.all(np.diff(trace) >= -1e-12)

    def test_criterion_not_below_start(self, rng):
        a = rng.normal(size=(8, 3))
        rotated, _ = varimax(a)
        assert varimax_criterion(rotated) >= varimax_criterion(a) - 1e-12

    def test_single_column_rejected(self):
        with pytest.raises(ShapeMismatch):
            varimax(np.ones((4, 1)))


class TestDeriveDesign:
    def test_threshold_per_row(self):
        a = np.array([[0.9, 0.2], [0.5, 0.5], [-0.1, 0.8]])
        q = derive_design(a)
        np.testing.assert_array_equal(q.q, [[1, 0], [1, 1], [0, 1]])

    def test_all_zero_row_keeps_every_factor(self):
        q = derive_design(np.array([[0.9, 0.0], [0.0, 0.0]]))
        np.testing.assert_array_equal(q.q, [[1, 0], [1, 1]])

    def test_threshold_one_keeps_row_maxima(self):
        q = derive_design(np.array([[0.9, -0.95], [0.3, 0.1]]), threshold=1.0)
        np.testing.assert_array_equal(q.q, [[0, 1], [1, 0]])
