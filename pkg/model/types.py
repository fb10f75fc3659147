"""
Domain types shared by every nslfa package.

All types are frozen value objects; their arrays are copied on construction
and marked read-only, so instances can be shared freely between threads.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from config import config
from model.errors import (
    AllZeroRow,
    EmptyMatrix,
    InputError,
    NonBinaryEntry,
    NonFiniteData,
    ShapeMismatch,
    TooFewRows,
)

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray, dtype=float) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


# -------------------------
# Design
# -------------------------

@dataclass(frozen=True)
class DesignMatrix:
    """Binary J×K matrix; q[j, k] = 1 when factor k may load on item j."""

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q)
        if q.ndim != 2 or q.size == 0:
            raise EmptyMatrix(f"design matrix must be a non-empty 2-d matrix, got shape {q.shape}")
        if not np.all((q == 0) | (q == 1)):
            bad = np.argwhere((q != 0) & (q != 1))[0]
            raise NonBinaryEntry(
                f"design entry ({bad[0]}, {bad[1]}) = {q[bad[0], bad[1]]} is not 0 or 1")
        zero_rows = np.flatnonzero(q.sum(axis=1) == 0)
        if zero_rows.size:
            raise AllZeroRow(f"item {zero_rows[0]} loads on no factor")
        object.__setattr__(self, "q", _frozen(q, dtype=np.int8))

    @property
    def J(self) -> int:
        return self.q.shape[0]

    @property
    def K(self) -> int:
        return self.q.shape[1]

    @property
    def mask(self) -> np.ndarray:
        """Boolean view of the free loading positions."""
        return self.q.astype(bool)

    @classmethod
    def ones(cls, J: int, K: int) -> "DesignMatrix":
        return cls(np.ones((J, K), dtype=np.int8))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DesignMatrix) and np.array_equal(self.q, other.q)

    def __hash__(self) -> int:
        return hash(self.q.tobytes())


# -------------------------
# Parameters
# -------------------------

@dataclass(frozen=True)
class Loadings:
    """J×K loading matrix; the zero pattern is enforced by apply_zero_pattern."""

    a: np.ndarray
    bound: float = field(default_factory=lambda: config.bounds.a_bound)

    def __post_init__(self) -> None:
        if np.ndim(self.a) != 2:
            raise ShapeMismatch(f"loadings must be 2-d, got shape {np.shape(self.a)}")
        object.__setattr__(self, "a", _frozen(self.a))

    @property
    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.a, axis=1)

    def bound_violations(self) -> np.ndarray:
        """Indices of rows whose norm exceeds the bound."""
        return np.flatnonzero(self.row_norms > self.bound)


@dataclass(frozen=True)
class FactorScores:
    """N×K factor score matrix."""

    x: np.ndarray
    bound: float = field(default_factory=lambda: config.bounds.x_bound)

    def __post_init__(self) -> None:
        if np.ndim(self.x) != 2:
            raise ShapeMismatch(f"factor scores must be 2-d, got shape {np.shape(self.x)}")
        object.__setattr__(self, "x", _frozen(self.x))

    @property
    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)

    def bound_violations(self) -> np.ndarray:
        return np.flatnonzero(self.row_norms > self.bound)


@dataclass(frozen=True)
class Hyperparams:
    """Squared-exponential hyperparameters: inverse squared lengthscale w, signal tau, noise sigma2."""

    w: float
    tau: float
    sigma2: float

    def __post_init__(self) -> None:
        for name in ("w", "tau", "sigma2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InputError(f"hyperparameter {name} must be finite and > 0, got {value}")

    def to_log(self) -> np.ndarray:
        return np.log([self.w, self.tau, self.sigma2])

    @classmethod
    def from_log(cls, v: np.ndarray) -> "Hyperparams":
        w, tau, sigma2 = np.exp(np.asarray(v, dtype=float))
        return cls(float(w), float(tau), float(sigma2))

    def as_dict(self) -> dict[str, float]:
        return {"w": self.w, "tau": self.tau, "sigma2": self.sigma2}


# -------------------------
# Data
# -------------------------

@dataclass(frozen=True)
class Dataset:
    """Observed N×J matrix with optional class labels and column names."""

    y: np.ndarray
    labels: Optional[np.ndarray] = None
    columns: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 2 or y.size == 0:
            raise EmptyMatrix(f"data must be a non-empty N×J matrix, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            i, j = np.argwhere(~np.isfinite(y))[0]
            raise NonFiniteData(f"non-finite value at row {i}, column {j}")
        if y.shape[0] < 2:
            raise TooFewRows(f"need at least 2 rows, got {y.shape[0]}")
        object.__setattr__(self, "y", _frozen(y))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (y.shape[0],):
                raise ShapeMismatch(
                    f"labels length {labels.shape} does not match N={y.shape[0]}")
            object.__setattr__(self, "labels", _frozen(labels, dtype=labels.dtype))
        if self.columns is not None:
            if len(self.columns) != y.shape[1]:
                raise ShapeMismatch(
                    f"{len(self.columns)} column names for {y.shape[1]} columns")
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def N(self) -> int:
        return self.y.shape[0]

    @property
    def J(self) -> int:
        return self.y.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.y[:, j]

    def subset(self, rows: np.ndarray) -> "Dataset":
        labels = None if self.labels is None else self.labels[rows]
        return Dataset(self.y[rows], labels=labels, columns=self.columns)


# -------------------------
# Results
# -------------------------

class ConvergenceReason(str, Enum):
    """Why an optimization or fit stopped."""
    GRAD_TOL = "grad_tol"
    OBJ_TOL = "obj_tol"
    MAX_ITERS = "max_iters"


@dataclass(frozen=True)
class FitResult:
    """
    Output of an NSLFA fit.

    objective_trace holds (iteration, value) pairs of the minimized objective
    (negative log posterior for joint MAP, negative marginal log-likelihood at
    Step-1 boundaries for the iterative scheme).

    dataset is the matrix the GP saw, i.e. Y minus offsets; f_hat and link
    predictions add the offsets back.
    """

    x_hat: FactorScores
    a_hat: Loadings
    theta_hat: Hyperparams
    f_hat: np.ndarray
    objective_trace: tuple[tuple[int, float], ...]
    converged: ConvergenceReason
    iterations: int
    dataset: Dataset
    method: str = "joint-map"
    offsets: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_hat", _frozen(self.f_hat))
        offsets = np.zeros(self.f_hat.shape[1]) if self.offsets is None else self.offsets
        object.__setattr__(self, "offsets", _frozen(offsets))

    @property
    def is_converged(self) -> bool:
        return self.converged is not ConvergenceReason.MAX_ITERS

    def bounds_report(self) -> dict:
        """Max row norms of the estimates against their configured bounds."""
        return {
            "max_x_norm": float(self.x_hat.row_norms.max()),
            "x_bound": self.x_hat.bound,
            "x_rows_over_bound": int(self.x_hat.bound_violations().size),
            "max_a_norm": float(self.a_hat.row_norms.max()),
            "a_bound": self.a_hat.bound,
            "a_rows_over_bound": int(self.a_hat.bound_violations().size),
        }
