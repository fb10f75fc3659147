"""
Marginal and joint likelihoods, their gradients, and posterior links.
"""

import math

import numpy as np
import pytest

from gp.inference import (
    LOG_2PI,
    LinkEvaluator,
    PriorSpec,
    XPrior,
    freeze_links,
    grad_joint,
    joint_log_posterior,
    marginal_loglik,
    posterior_f_cov_train,
    posterior_f_mean,
    posterior_f_train,
    posterior_f_var,
    step2_objective_loadings,
    step2_objective_scores,
    theta_gradient,
)
from gp.kernel import build_gram_set, dK_dtheta, index_covariance
from model.errors import ZeroPatternViolated
from model.types import DesignMatrix, Hyperparams


def dense_loglik(x, a, h, y):
    total = 0.0
    n = y.shape[0]
    for j in range(a.shape[0]):
        k = index_covariance(x @ a[j], h) + h.sigma2 * np.eye(n)
        _, logdet = np.linalg.slogdet(k)
        total += -0.5 * n * LOG_2PI - 0.5 * logdet - 0.5 * y[:, j] @ np.linalg.solve(k, y[:, j])
    return total


# ── Likelihoods ──

class TestMarginalLoglik:
    def test_scalar_closed_form(self):
        h = Hyperparams(w=1.0, tau=1.0, sigma2=1.0)
        g = build_gram_set([[0.0]], [[1.0]], h, [[1.0]])
        expected = -0.5 * LOG_2PI - 0.5 * math.log(2.0) - 0.25
        assert marginal_loglik([[1.0]], g) == pytest.approx(expected, abs=1e-12)

    def test_zero_response(self):
        h = Hyperparams(w=1.0, tau=1.0, sigma2=1.0)
        g = build_gram_set([[0.0]], [[1.0]], h, [[0.0]])
        assert marginal_loglik([[0.0]], g) == pytest.approx(-0.5 * LOG_2PI - 0.5 * math.log(2.0))

    def test_independent_limit(self):
        h = Hyperparams(w=1e6, tau=1.0, sigma2=0.5)
        x = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([[0.3], [-1.0], [0.2], [2.0]])
        g = build_gram_set(x, [[1.0]], h, y)
        expected = float(np.sum(-0.5 * LOG_2PI - 0.5 * math.log(1.5) - y[:, 0] ** 2 / 3.0))
        assert marginal_loglik(y, g) == pytest.approx(expected, rel=1e-10)

    def test_matches_dense_computation(self, small_point, small_gram):
        x, a, h, y = small_point
        assert marginal_loglik(y, small_gram) == pytest.approx(dense_loglik(x, a, h, y), rel=1e-9)

    def test_sign_flip_invariance(self, small_point):
        x, a, h, y = small_point
        flipped_x, flipped_a = x.copy(), a.copy()
        flipped_x[:, 1] *= -1
        flipped_a[:, 1] *= -1
        base = marginal_loglik(y, build_gram_set(x, a, h, y))
        flipped = marginal_loglik(y, build_gram_set(flipped_x, flipped_a, h, y))
        assert flipped == pytest.approx(base, rel=1e-12)


class TestJointLogPosterior:
    def test_uniform_prior_differs_by_constant(self, small_point, q_overlap):
        x, a, h, y = small_point
        joint = joint_log_posterior(x, a, h, y, q_overlap, PriorSpec(XPrior.UNIFORM))
        marginal = dense_loglik(x, a, h, y)
        n, J = y.shape
        assert joint == pytest.approx(marginal + J * 0.5 * n * LOG_2PI, rel=1e-9)

    def test_normal_prior_adds_score_penalty(self, small_point, q_overlap):
        x, a, h, y = small_point
        uniform = joint_log_posterior(x, a, h, y, q_overlap, PriorSpec(XPrior.UNIFORM))
        normal = joint_log_posterior(x, a, h, y, q_overlap, PriorSpec())
        assert normal == pytest.approx(uniform - 0.5 * np.sum(x * x))

    def test_rejects_constrained_loading(self, small_point, q_overlap):
        x, a, h, y = small_point
        bad = a.copy()
        bad[0, 1] = 0.1
        with pytest.raises(ZeroPatternViolated):
            joint_log_posterior(x, bad, h, y, q_overlap, PriorSpec())


# ── Gradients ──

def random_problem(seed: int):
    """Random (X, A, theta, Y, Q) with N <= 12, J <= 4, K <= 3 and A obeying Q."""
    rng = np.random.default_rng(seed)
    n, J, K = int(rng.integers(3, 13)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
    q = (rng.uniform(size=(J, K)) < 0.6).astype(int)
    q[np.arange(J), rng.integers(0, K, size=J)] = 1
    design = DesignMatrix(q)
    x = rng.normal(size=(n, K))
    a = np.where(design.mask, rng.normal(size=(J, K)), 0.0)
    h = Hyperparams(w=float(rng.uniform(0.3, 2.0)), tau=float(rng.uniform(0.5, 2.0)),
                    sigma2=float(rng.uniform(0.1, 1.0)))
    y = rng.normal(size=(n, J))
    return x, a, h, y, design


class TestGradJoint:
    STEP = 1e-6

    def objective(self, x, a, log_theta, y, q, prior):
        return joint_log_posterior(x, a, Hyperparams.from_log(log_theta), y, q, prior)

    @pytest.mark.parametrize("prior", [PriorSpec(), PriorSpec(XPrior.UNIFORM)])
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_finite_differences(self, seed, prior):
        x, a, h, y, q = random_problem(seed)
        gx, ga, gt = grad_joint(x, a, h, y, q, prior)
        log_theta = h.to_log()
        s = self.STEP

        for i in range(x.shape[0]):
            for k in range(x.shape[1]):
                xp, xm = x.copy(), x.copy()
                xp[i, k] += s
                xm[i, k] -= s
                fd = (self.objective(xp, a, log_theta, y, q, prior)
                      - self.objective(xm, a, log_theta, y, q, prior)) / (2 * s)
                assert gx[i, k] == pytest.approx(fd, rel=1e-5, abs=1e-6)

        for j, k in zip(*np.nonzero(q.mask)):
            ap, am = a.copy(), a.copy()
            ap[j, k] += s
            am[j, k] -= s
            fd = (self.objective(x, ap, log_theta, y, q, prior)
                  - self.objective(x, am, log_theta, y, q, prior)) / (2 * s)
            assert ga[j, k] == pytest.approx(fd, rel=1e-5, abs=1e-6)

        for p in range(3):
            tp, tm = log_theta.copy(), log_theta.copy()
            tp[p] += s
            tm[p] -= s
            fd = (self.objective(x, a, tp, y, q, prior)
                  - self.objective(x, a, tm, y, q, prior)) / (2 * s)
            assert gt[p] == pytest.approx(fd, rel=1e-5, abs=1e-6)

    def test_jittered_gram_amplitude_gradient(self):
        # sigma2 vanishes next to tau, so K = 2·11ᵀ is singular until jitter is added
        h = Hyperparams(w=1.0, tau=2.0, sigma2=1e-20)
        g = build_gram_set(np.ones((4, 1)), [[1.0]], h, np.zeros((4, 1)))
        assert g[0].jitter > 0
        np.testing.assert_allclose(dK_dtheta(g, h)[0][1], (g[0].c + g[0].jitter * np.eye(4)) / h.tau)
        # every eigenvalue of K scales with tau: d/dlog tau of -½ log|K| is -N/2
        assert theta_gradient(g, h)[1] == pytest.approx(-2.0, rel=1e-4)

    def test_constrained_loadings_have_zero_gradient(self, small_point, q_overlap):
        x, a, h, y = small_point
        _, ga, _ = grad_joint(x, a, h, y, q_overlap, PriorSpec())
        assert np.all(ga[~q_overlap.mask] == 0.0)

    def test_reuses_supplied_gram(self, small_point, small_gram, q_overlap):
        x, a, h, y = small_point
        fresh = grad_joint(x, a, h, y, q_overlap, PriorSpec())
        cached = grad_joint(x, a, h, y, q_overlap, PriorSpec(), gram=small_gram)
        for lhs, rhs in zip(fresh, cached):
            np.testing.assert_allclose(lhs, rhs)


# ── Posterior links ──

class TestPosteriorLinks:
    def test_single_point_mean(self):
        h = Hyperparams(w=1.0, tau=1.0, sigma2=1.0)
        g = build_gram_set([[0.0]], [[1.0]], h, [[2.0]])
        assert posterior_f_mean(0.0, 0, g, h) == pytest.approx(1.0)

    def test_reverts_to_prior_far_away(self, small_point, small_gram):
        _, _, h, _ = small_point
        far = small_gram[0].t.max() + 10.0 / math.sqrt(h.w)
        assert abs(posterior_f_mean(far, 0, small_gram, h)) < 1e-12
        assert posterior_f_var(far, 0, small_gram, h)[0] == pytest.approx(h.tau, rel=1e-10)

    def test_near_noiseless_interpolation(self):
        h = Hyperparams(w=1.0, tau=1.0, sigma2=1e-8)
        x = np.arange(5.0)[:, None]
        y = np.sin(x)
        g = build_gram_set(x, [[1.0]], h, y)
        mean = posterior_f_mean(x[:, 0], 0, g, h)
        np.testing.assert_allclose(mean, y[:, 0], atol=1e-3 * np.abs(y).max())

    def test_training_mean_matches_pointwise(self, small_point, small_gram):
        _, _, h, _ = small_point
        for j in range(small_gram.J):
            t = small_gram[j].t
            np.testing.assert_allclose(
                posterior_f_train(j, small_gram), posterior_f_mean(t, j, small_gram, h), rtol=1e-10, atol=1e-12,
            )

    def test_linear_in_response(self, small_point):
        x, a, h, y = small_point
        base = posterior_f_train(0, build_gram_set(x, a, h, y))
        doubled = posterior_f_train(0, build_gram_set(x, a, h, 2 * y))
        np.testing.assert_allclose(doubled, 2 * base, rtol=1e-10, atol=1e-12)

    def test_heavy_noise_shrinks_to_zero(self, small_point):
        x, a, _, y = small_point
        h = Hyperparams(w=0.8, tau=1.0, sigma2=1e8)
        assert np.abs(posterior_f_train(0, build_gram_set(x, a, h, y))).max() < 1e-6

    def test_training_covariance(self):
        h = Hyperparams(w=1.0, tau=2.0, sigma2=0.5)
        g = build_gram_set([[0.0]], [[1.0]], h, [[1.0]])
        cov = posterior_f_cov_train(0, g, h)
        assert cov[0, 0] == pytest.approx(0.5 * 2.0 / 2.5)

    def test_training_covariance_symmetric(self, small_point, small_gram):
        _, _, h, _ = small_point
        cov = posterior_f_cov_train(1, small_gram, h)
        np.testing.assert_array_equal(cov, cov.T)
        assert np.all(np.linalg.eigvalsh(cov) > -1e-10)


# ── Step-2 objectives ──

class TestStepTwoObjectives:
    @pytest.mark.parametrize("prior", [None, PriorSpec()])
    @pytest.mark.parametrize("seed", range(20))
    def test_random_score_gradients(self, seed, prior):
        x, a, h, y, _ = random_problem(seed)
        links = freeze_links(build_gram_set(x, a, h, y))
        s = 1e-6
        for i in range(x.shape[0]):
            _, grad = step2_objective_scores(x[i], i, links, y, a, prior=prior)
            for k in range(x.shape[1]):
                xp, xm = x[i].copy(), x[i].copy()
                xp[k] += s
                xm[k] -= s
                fd = (step2_objective_scores(xp, i, links, y, a, prior=prior)[0]
                      - step2_objective_scores(xm, i, links, y, a, prior=prior)[0]) / (2 * s)
                assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_loading_gradients(self, seed):
        x, a, h, y, q = random_problem(seed)
        g = build_gram_set(x, a, h, y)
        s = 1e-6
        for j in range(q.J):
            link = LinkEvaluator.from_gram(g, j)
            _, grad = step2_objective_loadings(a[j], j, link, x, y, q)
            for k in np.flatnonzero(q.mask[j]):
                ap, am = a[j].copy(), a[j].copy()
                ap[k] += s
                am[k] -= s
                fd = (step2_objective_loadings(ap, j, link, x, y, q)[0]
                      - step2_objective_loadings(am, j, link, x, y, q)[0]) / (2 * s)
                assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_score_prior_on_likelihood_scale(self, small_point, small_gram):
        x, a, h, y = small_point
        links = freeze_links(small_gram)
        plain, _ = step2_objective_scores(x[2], 2, links, y, a)
        with_prior, _ = step2_objective_scores(x[2], 2, links, y, a, prior=PriorSpec())
        assert with_prior == pytest.approx(plain - 0.5 * h.sigma2 * np.sum(x[2] ** 2))

    def test_score_gradient_matches_finite_differences(self, small_point, small_gram):
        x, a, _, y = small_point
        links = freeze_links(small_gram)
        i, s = 3, 1e-6
        _, grad = step2_objective_scores(x[i], i, links, y, a)
        for k in range(x.shape[1]):
            xp, xm = x[i].copy(), x[i].copy()
            xp[k] += s
            xm[k] -= s
            fd = (step2_objective_scores(xp, i, links, y, a)[0]
                  - step2_objective_scores(xm, i, links, y, a)[0]) / (2 * s)
            assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_loading_gradient_matches_finite_differences(self, small_point, small_gram, q_overlap):
        x, a, _, y = small_point
        j, s = 4, 1e-6
        link = LinkEvaluator.from_gram(small_gram, j)
        _, grad = step2_objective_loadings(a[j], j, link, x, y, q_overlap)
        for k in range(a.shape[1]):
            ap, am = a[j].copy(), a[j].copy()
            ap[k] += s
            am[k] -= s
            fd = (step2_objective_loadings(ap, j, link, x, y, q_overlap)[0]
                  - step2_objective_loadings(am, j, link, x, y, q_overlap)[0]) / (2 * s)
            assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_loading_gradient_masked(self, small_point, small_gram, q_overlap):
        x, a, _, y = small_point
        link = LinkEvaluator.from_gram(small_gram, 0)
        _, grad = step2_objective_loadings(a[0], 0, link, x, y, q_overlap)
        assert grad[1] == 0.0

    def test_loading_candidate_checked(self, small_point, small_gram, q_overlap):
        x, _, _, y = small_point
        link = LinkEvaluator.from_gram(small_gram, 0)
        with pytest.raises(ZeroPatternViolated):
            step2_objective_loadings(np.array([1.0, 0.5]), 0, link, x, y, q_overlap)

    def test_vanishing_amplitude(self, small_point, q_overlap):
        x, a, _, y = small_point
        h = Hyperparams(w=0.8, tau=1e-12, sigma2=0.4)
        links = freeze_links(build_gram_set(x, a, h, y))
        obj, _ = step2_objective_scores(x[0], 0, links, y, a)
        assert obj == pytest.approx(0.0, abs=1e-9)

    def test_frozen_link_matches_posterior_mean(self, small_point, small_gram):
        _, _, h, _ = small_point
        link = LinkEvaluator.from_gram(small_gram, 2)
        grid = np.linspace(-2, 2, 7)
        np.testing.assert_allclose(link(grid), posterior_f_mean(grid, 2, small_gram, h), rtol=1e-12)

    def test_design_all_ones_accepts_any_row(self, small_point, small_gram):
        x, a, _, y = small_point
        q = DesignMatrix.ones(*a.shape)
        link = LinkEvaluator.from_gram(small_gram, 0)
        obj, grad = step2_objective_loadings(np.array([0.4, -0.7]), 0, link, x, y, q)
        assert np.isfinite(obj)
        assert grad.shape == (2,)
