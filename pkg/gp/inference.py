"""
Likelihoods, gradients and posterior link prediction.

Objectives here are log densities to be maximized; the estimator negates
them before handing them to a minimizer.

Rules:
- All evaluations are pure given their inputs
- Hyperparameter gradients are reported in log coordinates
- Loading gradients are exactly zero at design-fixed positions
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from gp.kernel import (
    ArrayLike,
    GramSet,
    ItemGram,
    as_matrix,
    build_gram_set,
    index_gradient,
    se_kernel,
)
from model.design import check_zero_pattern
from model.errors import ShapeMismatch
from model.types import DesignMatrix, Hyperparams

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


# -------------------------
# Priors
# -------------------------

class XPrior(str, Enum):
    NORMAL = "normal"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class PriorSpec:
    """Priors on scores, loadings and hyperparameters; only the X prior is configurable."""

    x_prior: XPrior = XPrior.NORMAL
    a_prior: str = field(default="uniform", init=False)
    theta_prior: str = field(default="uniform", init=False)

    def log_density_x(self, x: np.ndarray) -> float:
        if self.x_prior is XPrior.UNIFORM:
            return 0.0
        return float(-0.5 * np.sum(x * x))

    def grad_x(self, x: np.ndarray) -> np.ndarray:
        if self.x_prior is XPrior.UNIFORM:
            return np.zeros_like(x)
        return -x


# -------------------------
# Likelihoods
# -------------------------

def _item_terms(item: ItemGram, y_col: np.ndarray) -> tuple[float, float]:
    """(½ log|K_j|, ½ Y_jᵀK_j⁻¹Y_j)."""
    return 0.5 * item.log_det, 0.5 * float(np.dot(y_col, item.alpha))


def marginal_loglik(y: ArrayLike, g: GramSet) -> float:
    """Σ_j [-(N/2) log 2π - ½ log|K_j| - ½ Y_jᵀK_j⁻¹Y_j]."""
    y_arr = as_matrix(y)
    n = y_arr.shape[0]
    total = 0.0
    for j, item in enumerate(g.items):
        half_logdet, half_quad = _item_terms(item, y_arr[:, j])
        total += -0.5 * n * LOG_2PI - half_logdet - half_quad
    return total


def joint_log_posterior(
    x: ArrayLike,
    a: ArrayLike,
    h: Hyperparams,
    y: ArrayLike,
    q: DesignMatrix,
    prior: PriorSpec,
    gram: GramSet | None = None,
) -> float:
    """
    ℓ_F(X, A, θ) = Σ_j [-½ log|K_j| - ½ tr(K_j⁻¹Y_jY_jᵀ)] + log p(X).

    Raises:
        ZeroPatternViolated: a constrained loading is nonzero
    """
    x_arr, a_arr, y_arr = as_matrix(x), as_matrix(a), as_matrix(y)
    check_zero_pattern(a_arr, q)
    g = gram if gram is not None else build_gram_set(x_arr, a_arr, h, y_arr)
    total = 0.0
    for j, item in enumerate(g.items):
        half_logdet, half_quad = _item_terms(item, y_arr[:, j])
        total += -half_logdet - half_quad
    return total + prior.log_density_x(x_arr)


@dataclass(frozen=True)
class JointGradient:
    grad_x: np.ndarray
    grad_a: np.ndarray
    grad_theta: np.ndarray

    def __iter__(self):
        return iter((self.grad_x, self.grad_a, self.grad_theta))


def _weight_matrices(g: GramSet) -> list[np.ndarray]:
    """W_j = alpha_j alpha_jᵀ - K_j⁻¹."""
    return [np.outer(item.alpha, item.alpha) - item.inverse() for item in g.items]


def theta_gradient(g: GramSet, h: Hyperparams, weights: list[np.ndarray] | None = None) -> np.ndarray:
    """
    ∂/∂(log w, log tau, log sigma2) of Σ_j [-½ log|K_j| - ½ Y_jᵀK_j⁻¹Y_j].

    Uses ½ tr(W_j ∂K_j/∂θ) with the closed-form derivative matrices, chained by θ.
    A Cholesky jitter is proportional to tau, so it enters the tau derivative.
    """
    weights = weights if weights is not None else _weight_matrices(g)
    grad = np.zeros(3)
    for item, w_mat in zip(g.items, weights):
        diff = item.t[:, None] - item.t[None, :]
        wc = w_mat * item.c
        # ∂K/∂w = -½ D ⊙ C ; ∂K/∂tau = (C + jitter·I) / tau ; ∂K/∂sigma2 = I
        grad[0] += 0.5 * np.sum(wc * (-0.5 * diff * diff)) * h.w
        grad[1] += 0.5 * (np.sum(wc) + item.jitter * np.trace(w_mat))
        grad[2] += 0.5 * np.trace(w_mat) * h.sigma2
    return grad


def grad_joint(
    x: ArrayLike,
    a: ArrayLike,
    h: Hyperparams,
    y: ArrayLike,
    q: DesignMatrix,
    prior: PriorSpec,
    gram: GramSet | None = None,
) -> JointGradient:
    """
    Gradient of joint_log_posterior with respect to X, A and log θ.

    Returns:
        JointGradient(grad_x N×K, grad_a J×K masked by q, grad_theta 3-vector)
    """
    x_arr, a_arr, y_arr = as_matrix(x), as_matrix(a), as_matrix(y)
    check_zero_pattern(a_arr, q)
    g = gram if gram is not None else build_gram_set(x_arr, a_arr, h, y_arr)
    weights = _weight_matrices(g)

    g_t = index_gradient(g, h, weights)
    grad_x = g_t @ a_arr + prior.grad_x(x_arr)
    grad_a = np.where(q.mask, g_t.T @ x_arr, 0.0)
    grad_theta = theta_gradient(g, h, weights)
    return JointGradient(grad_x=grad_x, grad_a=grad_a, grad_theta=grad_theta)


# -------------------------
# Posterior link functions
# -------------------------

def posterior_f_mean(t_star, j: int, g: GramSet, h: Hyperparams, y: ArrayLike | None = None):
    """
    E[f_j(t*) | data] = ψ_j(t*)ᵀ alpha_j with ψ_j(t*)_l = k(t*, t_lj).

    Accepts a scalar or an array of t*; y is implied by the cached alpha_j.
    """
    item = g.items[j]
    t_star_arr = np.atleast_1d(np.asarray(t_star, dtype=float))
    psi = se_kernel(t_star_arr[:, None], item.t[None, :], h)
    out = psi @ item.alpha
    return float(out[0]) if np.ndim(t_star) == 0 else out


def posterior_f_var(t_star, j: int, g: GramSet, h: Hyperparams) -> np.ndarray:
    """Posterior variance of f_j at t*: tau - ψᵀK_j⁻¹ψ (clipped at 0)."""
    item = g.items[j]
    t_star_arr = np.atleast_1d(np.asarray(t_star, dtype=float))
    psi = se_kernel(t_star_arr[:, None], item.t[None, :], h)
    reduction = np.sum(psi * item.solve(psi.T).T, axis=1)
    return np.clip(h.tau - reduction, 0.0, None)


def posterior_f_train(j: int, g: GramSet, y: ArrayLike | None = None) -> np.ndarray:
    """μ_j = C_j (C_j + sigma2 I)⁻¹ Y_j = C_j alpha_j."""
    item = g.items[j]
    return item.c @ item.alpha


def posterior_f_train_all(g: GramSet) -> np.ndarray:
    """N×J matrix of posterior link means at the training indices."""
    return np.column_stack([posterior_f_train(j, g) for j in range(g.J)])


def posterior_f_cov_train(j: int, g: GramSet, h: Hyperparams) -> np.ndarray:
    """sigma2·C_j (C_j + sigma2 I)⁻¹, symmetrized."""
    item = g.items[j]
    # K⁻¹C is the transpose of C K⁻¹ for symmetric C and K
    cov = h.sigma2 * item.solve(item.c).T
    return 0.5 * (cov + cov.T)


# -------------------------
# Step-2 objectives
# -------------------------

@dataclass(frozen=True)
class LinkEvaluator:
    """
    Frozen posterior-mean link for one item.

    Training indices and alpha stay fixed while scores or loadings move, so
    f̂_j can be evaluated and differentiated at any new index.
    """

    t_train: np.ndarray
    alpha: np.ndarray
    h: Hyperparams

    @classmethod
    def from_gram(cls, g: GramSet, j: int) -> "LinkEvaluator":
        return cls(t_train=g.items[j].t, alpha=g.items[j].alpha, h=g.h)

    def value_and_slope(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(f̂(t), f̂'(t)) using dψ/dt* = -w (t* - t_l) k(t*, t_l)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        diff = t[:, None] - self.t_train[None, :]
        psi = self.h.tau * np.exp(-0.5 * self.h.w * diff * diff)
        value = psi @ self.alpha
        slope = (-self.h.w * diff * psi) @ self.alpha
        return value, slope

    def __call__(self, t) -> np.ndarray:
        return self.value_and_slope(t)[0]


def freeze_links(g: GramSet) -> list[LinkEvaluator]:
    return [LinkEvaluator.from_gram(g, j) for j in range(g.J)]


def step2_objective_scores(
    x_cand: np.ndarray,
    i: int,
    links: Sequence[LinkEvaluator],
    y: ArrayLike,
    a: ArrayLike,
    prior: PriorSpec | None = None,
) -> tuple[float, np.ndarray]:
    """
    ℓ_i(x) = Σ_j [Y_ij f̂_j(a_jᵀx) - ½ f̂_j(a_jᵀx)²] and its gradient in x.

    With a prior, sigma2·log p(x) is added: ℓ_i is a Gaussian log-likelihood
    times sigma2, so the sum is the row's log posterior on that same scale.
    """
    y_arr, a_arr = as_matrix(y), as_matrix(a)
    x_cand = np.asarray(x_cand, dtype=float)
    if x_cand.shape != (a_arr.shape[1],):
        raise ShapeMismatch(f"candidate score has shape {x_cand.shape}, expected ({a_arr.shape[1]},)")
    t = a_arr @ x_cand
    values = np.empty(len(links))
    slopes = np.empty(len(links))
    for j, link in enumerate(links):
        v, s = link.value_and_slope(t[j])
        values[j], slopes[j] = v[0], s[0]
    y_row = y_arr[i]
    obj = float(np.sum(y_row * values - 0.5 * values * values))
    grad = ((y_row - values) * slopes) @ a_arr
    if prior is not None and links:
        weight = links[0].h.sigma2
        obj += weight * prior.log_density_x(x_cand)
        grad = grad + weight * prior.grad_x(x_cand)
    return obj, grad


def step2_objective_loadings(
    a_cand: np.ndarray,
    j: int,
    link: LinkEvaluator,
    x: ArrayLike,
    y: ArrayLike,
    q: DesignMatrix,
) -> tuple[float, np.ndarray]:
    """
    ℓ_j(a) = Σ_i [Y_ij f̂_j(aᵀx_i) - ½ f̂_j(aᵀx_i)²] and its gradient, masked to free coordinates.

    Raises:
        ZeroPatternViolated: a_cand is nonzero where row j of q is 0
    """
    x_arr, y_arr = as_matrix(x), as_matrix(y)
    a_cand = np.asarray(a_cand, dtype=float)
    row = np.zeros((q.J, q.K))
    row[j] = a_cand
    check_zero_pattern(row, q)
    values, slopes = link.value_and_slope(x_arr @ a_cand)
    y_col = y_arr[:, j]
    obj = float(np.sum(y_col * values - 0.5 * values * values))
    grad = ((y_col - values) * slopes) @ x_arr
    return obj, np.where(q.mask[j], grad, 0.0)
