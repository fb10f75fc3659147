"""
Flat parameter vectors for the minimizers.

Layout: [Z row-major (N·K), A row-major (J·K), log w, log tau, s] with
sigma2 = floor + exp(s). The mask frees every score, every design-free
loading and all three hyperparameter coordinates.

Scores are read from Z with each column rescaled to a fixed norm. The
likelihood only sees the indices XAᵀ, and those are unchanged when a score
column shrinks while its loading column (or w) grows, so without the fixed
norm the score prior drags X toward zero along that direction.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config import config
from model.errors import ShapeMismatch
from model.types import DesignMatrix, Hyperparams


def hyper_to_vector(h: Hyperparams, floor: float) -> np.ndarray:
    bound = config.numerics.log_theta_bound
    noise = max(h.sigma2 - floor, floor * 1e-3)
    return np.clip(np.array([np.log(h.w), np.log(h.tau), np.log(noise)]), -bound, bound)


def hyper_in_box(v: np.ndarray, bound: Optional[float] = None) -> bool:
    """True when every log coordinate lies inside the hyperparameter prior's support."""
    bound = config.numerics.log_theta_bound if bound is None else bound
    return bool(np.all(np.isfinite(v)) and np.all(np.abs(v) <= bound))


def vector_to_hyper(v: np.ndarray, floor: float) -> Hyperparams:
    """Hyperparameters from (log w, log tau, s); coordinates are clipped to the prior's support."""
    bound = config.numerics.log_theta_bound
    v = np.clip(np.asarray(v, dtype=float), -bound, bound)
    return Hyperparams(w=float(np.exp(v[0])), tau=float(np.exp(v[1])), sigma2=float(floor + np.exp(v[2])))


def hyper_grad_to_vector(grad_log: np.ndarray, h: Hyperparams, floor: float) -> np.ndarray:
    """Convert a log-coordinate gradient to the packed (log w, log tau, s) coordinates."""
    out = np.array(grad_log, dtype=float, copy=True)
    # d/ds = d/dsigma2 · exp(s) = (d/dlog sigma2 / sigma2) · (sigma2 - floor)
    out[2] = grad_log[2] * (h.sigma2 - floor) / h.sigma2
    return out


def column_norms(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(x, dtype=float), axis=0)


def fix_column_norms(z: np.ndarray, norms: np.ndarray) -> np.ndarray:
    """Rescale each column of z to the given norm; a zero column gives non-finite entries."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return z * (norms / column_norms(z))


def fixed_norm_gradient(z: np.ndarray, norms: np.ndarray, grad_x: np.ndarray) -> np.ndarray:
    """
    Chain a gradient in X = fix_column_norms(z) back to z.

    Per column: (r / ‖z‖)·(g - (g·u)u) with u = z / ‖z‖.
    """
    current = column_norms(z)
    u = z / current
    radial = np.sum(grad_x * u, axis=0)
    return (norms / current) * (grad_x - radial * u)


def rebalance(x: np.ndarray, a: np.ndarray, norms: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Rescale score columns to the given norms and loading columns inversely; XAᵀ is unchanged.

    All-zero score columns are left as they are.
    """
    current = column_norms(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(current > 0, norms / current, 1.0)
    return x * scale, a / scale


@dataclass(frozen=True, eq=False)
class ParamPacker:
    n: int
    q: DesignMatrix
    floor: float
    x_norms: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.x_norms is not None:
            norms = np.asarray(self.x_norms, dtype=float)
            if norms.shape != (self.q.K,) or not np.all(norms > 0):
                raise ShapeMismatch(f"score column norms must be {self.q.K} positive values, got {norms}")
            object.__setattr__(self, "x_norms", norms)

    @property
    def n_x(self) -> int:
        return self.n * self.q.K

    @property
    def n_a(self) -> int:
        return self.q.J * self.q.K

    @property
    def size(self) -> int:
        return self.n_x + self.n_a + 3

    def mask(self) -> np.ndarray:
        return np.concatenate([
            np.ones(self.n_x, dtype=bool),
            self.q.mask.ravel(),
            np.ones(3, dtype=bool),
        ])

    def pack(self, x: np.ndarray, a: np.ndarray, h: Hyperparams) -> np.ndarray:
        return np.concatenate([np.ravel(x), np.ravel(a), hyper_to_vector(h, self.floor)])

    def raw_scores(self, v: np.ndarray) -> np.ndarray:
        return v[: self.n_x].reshape(self.n, self.q.K)

    def theta_in_box(self, v: np.ndarray) -> bool:
        return hyper_in_box(v[-3:])

    def unpack(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray, Hyperparams]:
        z = self.raw_scores(v)
        x = z if self.x_norms is None else fix_column_norms(z, self.x_norms)
        a = v[self.n_x: self.n_x + self.n_a].reshape(self.q.J, self.q.K)
        return x, a, vector_to_hyper(v[-3:], self.floor)

    def pack_gradient(
        self, v: np.ndarray, grad_x: np.ndarray, grad_a: np.ndarray, grad_theta: np.ndarray, h: Hyperparams
    ) -> np.ndarray:
        if self.x_norms is not None:
            grad_x = fixed_norm_gradient(self.raw_scores(v), self.x_norms, grad_x)
        return np.concatenate([
            np.ravel(grad_x),
            np.ravel(grad_a),
            hyper_grad_to_vector(grad_theta, h, self.floor),
        ])
