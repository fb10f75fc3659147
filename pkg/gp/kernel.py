"""
Squared-exponential kernel on projected indices and the per-item Gram set.

For item j the index of row i is t_ij = a_jᵀx_i. The covariance is
C_j(i, l) = tau·exp(-w (t_ij - t_lj)² / 2) and the noisy Gram matrix is
K_j = sigma2·I + C_j. Derivative matrices are formed on demand from t_j.

Functions accept either domain types or plain arrays for X, A and Y so the
same code serves fitting (typed) and optimizer inner loops (arrays).
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from config import config
from gp.linalg import chol_logdet, chol_solve, jittered_cholesky
from model.errors import ConstrainedLoading, IndexOutOfRange, ShapeMismatch
from model.types import Dataset, DesignMatrix, FactorScores, Hyperparams, Loadings

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, FactorScores, Loadings, Dataset]


def as_matrix(value: ArrayLike) -> np.ndarray:
    """Unwrap a domain type to its 2-d array."""
    if isinstance(value, FactorScores):
        return value.x
    if isinstance(value, Loadings):
        return value.a
    if isinstance(value, Dataset):
        return value.y
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr


# -------------------------
# Kernel
# -------------------------

def se_kernel(t, t_prime, h: Hyperparams):
    """tau·exp(-w (t - t')² / 2); broadcasts over arrays."""
    d = np.subtract(t, t_prime)
    return h.tau * np.exp(-0.5 * h.w * d * d)


def sq_distances(t: np.ndarray) -> np.ndarray:
    """D(i, l) = (t_i - t_l)²."""
    diff = t[:, None] - t[None, :]
    return diff * diff


def index_covariance(t: np.ndarray, h: Hyperparams) -> np.ndarray:
    """C(i, l) = k(t_i, t_l)."""
    return h.tau * np.exp(-0.5 * h.w * sq_distances(t))


# -------------------------
# Gram set
# -------------------------

@dataclass(frozen=True)
class ItemGram:
    """Cached quantities for one item."""

    t: np.ndarray
    c: np.ndarray
    k: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float

    @property
    def log_det(self) -> float:
        return chol_logdet(self.chol)

    def inverse(self) -> np.ndarray:
        return chol_solve(self.chol, np.eye(self.t.shape[0]))

    def solve(self, b: np.ndarray) -> np.ndarray:
        return chol_solve(self.chol, b)


@dataclass(frozen=True)
class GramSet:
    """Per-item Gram matrices built at one (X, A, theta)."""

    items: tuple[ItemGram, ...]
    h: Hyperparams

    @property
    def J(self) -> int:
        return len(self.items)

    @property
    def N(self) -> int:
        return self.items[0].t.shape[0]

    def __getitem__(self, j: int) -> ItemGram:
        return self.items[j]

    @property
    def indices(self) -> np.ndarray:
        """N×J matrix of projected indices t_ij."""
        return np.column_stack([item.t for item in self.items])

    def condition_numbers(self) -> np.ndarray:
        return np.array([np.linalg.cond(item.k) for item in self.items])


def build_item_gram(t: np.ndarray, y_col: np.ndarray, h: Hyperparams, label: str = "") -> ItemGram:
    c = index_covariance(t, h)
    k = c + h.sigma2 * np.eye(t.shape[0])
    chol, jitter = jittered_cholesky(k, scale=h.tau, label=label)
    if jitter:
        k = k + jitter * np.eye(t.shape[0])
    alpha = chol_solve(chol, y_col)
    for arr in (t, c, k, chol, alpha):
        arr.setflags(write=False)
    return ItemGram(t=t, c=c, k=k, chol=chol, alpha=alpha, jitter=jitter)


def build_gram_set(x: ArrayLike, a: ArrayLike, h: Hyperparams, y: ArrayLike) -> GramSet:
    """
    Build C_j, K_j, the Cholesky factor of K_j and alpha_j = K_j⁻¹Y_j for every item.

    Raises:
        ShapeMismatch: inconsistent X / A / Y shapes
        FactorizationFailed: K_j not factorizable after maximum jitter
    """
    x_arr, a_arr, y_arr = as_matrix(x), as_matrix(a), as_matrix(y)
    if x_arr.shape[1] != a_arr.shape[1]:
        raise ShapeMismatch(f"X has {x_arr.shape[1]} factors, A has {a_arr.shape[1]}")
    if y_arr.shape != (x_arr.shape[0], a_arr.shape[0]):
        raise ShapeMismatch(
            f"Y shape {y_arr.shape} does not match (N={x_arr.shape[0]}, J={a_arr.shape[0]})")

    t_all = x_arr @ a_arr.T
    items = tuple(
        build_item_gram(np.ascontiguousarray(t_all[:, j]), y_arr[:, j].copy(), h, label=f"item={j}")
        for j in range(a_arr.shape[0])
    )
    gram = GramSet(items=items, h=h)

    if logger.isEnabledFor(logging.DEBUG):
        cond = gram.condition_numbers()
        logger.debug(f"[GramSet] J={gram.J} N={gram.N} max_cond={cond.max():.3e}")
    return gram


def log_condition_diagnostics(gram: GramSet, context: str = "") -> np.ndarray:
    """Log the worst K_j condition number; warn above the configured threshold."""
    cond = gram.condition_numbers()
    worst = int(np.argmax(cond))
    msg = f"[GramSet] {context}max_cond={cond[worst]:.3e} item={worst}"
    if cond[worst] > config.numerics.condition_warning:
        logger.warning(msg)
    else:
        logger.info(msg)
    return cond


# -------------------------
# Derivative matrices
# -------------------------

def dK_dtheta(g: GramSet, h: Hyperparams) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Per item: (∂K_j/∂w, ∂K_j/∂tau, ∂K_j/∂sigma2) in natural coordinates.

    A factorization jitter scales with tau and is included in ∂K_j/∂tau.
    """
    out = []
    for item in g.items:
        n = item.t.shape[0]
        c = item.c
        d_w = -0.5 * sq_distances(item.t) * c
        d_tau = (c + item.jitter * np.eye(n)) / h.tau
        out.append((d_w, d_tau, np.eye(n)))
    return out


def _index_factor(item: ItemGram, h: Hyperparams) -> np.ndarray:
    """E(i, l) = -w (t_i - t_l) C(i, l) = ∂C(i, l)/∂t_i."""
    diff = item.t[:, None] - item.t[None, :]
    return -h.w * diff * item.c


def dK_dx(g: GramSet, h: Hyperparams, a: ArrayLike, x: ArrayLike, i: int, k: int) -> list[np.ndarray]:
    """
    Per item: ∂K_j/∂x_ik, nonzero only in row and column i.

    Entry (i, l) = (l, i) = -w (t_ij - t_lj) a_jk C_j(i, l); entry (i, i) = 0.
    """
    a_arr, x_arr = as_matrix(a), as_matrix(x)
    if not (0 <= i < x_arr.shape[0]) or not (0 <= k < x_arr.shape[1]):
        raise IndexOutOfRange(f"(i={i}, k={k}) outside X of shape {x_arr.shape}")

    out = []
    for j, item in enumerate(g.items):
        n = item.t.shape[0]
        mat = np.zeros((n, n))
        if a_arr[j, k] != 0.0:
            row = -h.w * (item.t[i] - item.t) * a_arr[j, k] * item.c[i]
            row[i] = 0.0
            mat[i, :] = row
            mat[:, i] = row
        out.append(mat)
    return out


def trace_dK_dx(b: np.ndarray, g: GramSet, h: Hyperparams, a: ArrayLike, i: int, k: int, j: int) -> float:
    """tr(B·∂K_j/∂x_ik) = 2·Σ_{l≠i} B(i, l)·c_il for symmetric B, without any N×N product."""
    a_arr = as_matrix(a)
    item = g.items[j]
    c_row = -h.w * (item.t[i] - item.t) * a_arr[j, k] * item.c[i]
    c_row[i] = 0.0
    return float(2.0 * np.dot(b[i], c_row))


def dK_da(g: GramSet, h: Hyperparams, x: ArrayLike, m: int, k: int, q: DesignMatrix) -> np.ndarray:
    """
    ∂K_m/∂a_mk = -D2 ⊙ C_m with D2(i, l) = w (t_im - t_lm)(x_ik - x_lk).

    The derivative of K_j for j ≠ m is zero and not materialized.
    """
    x_arr = as_matrix(x)
    if not (0 <= m < q.J) or not (0 <= k < q.K):
        raise IndexOutOfRange(f"(m={m}, k={k}) outside design of shape {q.q.shape}")
    if q.q[m, k] == 0:
        raise ConstrainedLoading(f"loading ({m}, {k}) is fixed at 0 by the design")
    item = g.items[m]
    d2 = h.w * (item.t[:, None] - item.t[None, :]) * (x_arr[:, k][:, None] - x_arr[:, k][None, :])
    return -d2 * item.c


def index_gradient(g: GramSet, h: Hyperparams, weights: list[np.ndarray]) -> np.ndarray:
    """
    N×J matrix G(i, j) = ½·tr(W_j ∂K_j/∂t_ij) for symmetric weight matrices W_j.

    Every ∂/∂x_ik and ∂/∂a_jk block follows from G through t_ij = a_jᵀx_i:
    grad_x = G·A and grad_a = Gᵀ·X.
    """
    cols = []
    for item, w_mat in zip(g.items, weights):
        cols.append(np.sum(w_mat * _index_factor(item, h), axis=1))
    return np.column_stack(cols)

