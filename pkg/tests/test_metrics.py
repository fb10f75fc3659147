"""
Evaluation metrics for fitted factor models.
"""

import math

import numpy as np
import pytest

from analytics.metrics import (
    EvalSummary,
    abs_corr,
    d_f,
    d_xa,
    evaluate,
    nn_class_error,
    sin_angle,
)
from model.errors import DegenerateVariance, MissingLabels, ShapeMismatch, ZeroVector


# ── Angles and correlation ──

class TestSinAngle:
    def test_parallel(self):
        assert sin_angle([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == pytest.approx(0.0, abs=1e-7)

    def test_orthogonal(self):
        assert sin_angle([1.0, 0.0], [0.0, 2.0]) == pytest.approx(1.0)

    def test_scale_and_sign_invariant(self, rng):
        u, v = rng.normal(size=20), rng.normal(size=20)
        assert sin_angle(-3.0 * u, v) == pytest.approx(sin_angle(u, v))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            sin_angle([0.0, 0.0], [1.0, 1.0])

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatch):
            sin_angle([1.0, 2.0], [1.0])


class TestAbsCorr:
    def test_affine(self, rng):
        u = rng.normal(size=50)
        assert abs_corr(u, 2 * u + 3) == pytest.approx(1.0)

    def test_sign_convention(self, rng):
        u = rng.normal(size=50)
        assert abs_corr(u, -u) == pytest.approx(1.0)

    def test_independent_samples(self):
        rng = np.random.default_rng(99)
        assert abs_corr(rng.normal(size=10_000), rng.normal(size=10_000)) <= 0.05

    def test_constant_vector(self):
        with pytest.raises(DegenerateVariance):
            abs_corr([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


# ── Reconstruction errors ──

class TestReconstruction:
    def test_identical_product(self, rng):
        x, a = rng.normal(size=(10, 2)), rng.normal(size=(4, 2))
        assert d_xa(x, a, x, a) == 0.0

    def test_scale_indeterminacy(self, rng):
        x, a = rng.normal(size=(10, 2)), rng.normal(size=(4, 2))
        assert d_xa(x, a, 2 * x, a / 2) == pytest.approx(0.0, abs=1e-28)

    def test_single_entry_perturbation(self):
        x = np.eye(3)
        a = np.eye(3)
        a_hat = a.copy()
        a_hat[1, 1] += 0.3
        assert d_xa(x, a, x, a_hat) == pytest.approx(0.09 / 9)

    def test_d_xa_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            d_xa(rng.normal(size=(5, 2)), rng.normal(size=(3, 2)), rng.normal(size=(4, 2)), rng.normal(size=(3, 2)))

    def test_d_f_equal(self, rng):
        f = rng.normal(size=(5, 3))
        assert d_f(f, f) == 0.0

    def test_d_f_constant_offset(self, rng):
        f = rng.normal(size=(5, 3))
        assert d_f(f + 0.1, f) == pytest.approx(0.01)

    def test_d_f_single_term(self):
        assert d_f(np.array([[1.5]]), np.array([[1.0]])) == pytest.approx(0.25)

    def test_d_f_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            d_f(np.zeros((2, 2)), np.zeros((2, 3)))


# ── Nearest-neighbour error ──

class TestNnClassError:
    def test_separated_clusters(self):
        z = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])
        assert nn_class_error(z, np.array([0, 0, 1, 1])) == 0

    def test_two_points_different_labels(self):
        assert nn_class_error(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array(["a", "b"])) == 2

    def test_alternating_line(self):
        z = np.column_stack([np.arange(6.0), np.zeros(6)])
        assert nn_class_error(z, np.array([0, 1, 0, 1, 0, 1])) == 6

    def test_single_class(self, rng):
        assert nn_class_error(rng.normal(size=(15, 2)), np.zeros(15)) == 0

    def test_labels_required(self, rng):
        with pytest.raises(MissingLabels):
            nn_class_error(rng.normal(size=(4, 2)), None)

    def test_label_count_checked(self, rng):
        with pytest.raises(ShapeMismatch):
            nn_class_error(rng.normal(size=(4, 2)), np.zeros(3))


# ── Summaries ──

class TestEvaluate:
    def test_perfect_estimate(self, rng):
        x, a = rng.normal(size=(20, 2)), rng.normal(size=(5, 2))
        summary = evaluate(x, a, x, a)
        assert summary.corr == pytest.approx((1.0, 1.0))
        assert summary.sin == pytest.approx((0.0, 0.0), abs=1e-7)
        assert summary.d_xa == 0.0
        assert summary.d_f is None

    def test_degenerate_column_is_nan(self, rng):
        x, a = rng.normal(size=(20, 2)), rng.normal(size=(5, 2))
        x_hat = x.copy()
        x_hat[:, 1] = 0.0
        summary = evaluate(x, a, x_hat, a)
        assert math.isnan(summary.corr[1])
        assert math.isnan(summary.sin[1])
        assert summary.corr[0] == pytest.approx(1.0)

    def test_link_error_included(self, rng):
        x, a = rng.normal(size=(8, 2)), rng.normal(size=(3, 2))
        f = rng.normal(size=(8, 3))
        summary = evaluate(x, a, x, a, f_true=f, f_hat=f + 0.1)
        assert summary.d_f == pytest.approx(0.01)

    def test_row_layout(self):
        summary = EvalSummary(corr=(0.9, 0.5), sin=(0.3, 0.8), d_xa=1.2, d_f=0.4)
        assert list(summary.as_row()) == ["corr_x1", "corr_x2", "sin_x1", "sin_x2", "d_xa", "d_f"]
        assert summary.mean_abs_corr == pytest.approx(0.7)
        assert summary.mean_sin == pytest.approx(0.55)
