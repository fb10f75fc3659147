"""
Iterative two-step estimation.

Step 1 fits the hyperparameters by maximizing the marginal likelihood with
scores and loadings frozen. Step 2 freezes the posterior-mean links and
updates each score row, then each loading row, against the per-row and
per-item objectives. Step 3 stops once the Step-1 marginal log-likelihood
settles.

Score columns are rescaled to their starting norms after every Step 2 (the
loadings absorb the inverse scale), and a Step-2 move is only taken as far
as it keeps the marginal log-likelihood from falling, so the Step-1 trace
never decreases.
"""

import logging
from typing import Optional

import numpy as np

from estimator.common import center_columns, finish_fit, minimize
from estimator.initialization import pca_init, sigma2_floor
from estimator.joint_map import resolve_theta_init
from estimator.packing import (
    column_norms,
    hyper_grad_to_vector,
    hyper_in_box,
    hyper_to_vector,
    rebalance,
    vector_to_hyper,
)
from estimator.settings import FitConfig
from gp.inference import (
    LinkEvaluator,
    PriorSpec,
    freeze_links,
    marginal_loglik,
    step2_objective_loadings,
    step2_objective_scores,
    theta_gradient,
)
from gp.kernel import build_gram_set, log_condition_diagnostics
from model.errors import FactorizationFailed, InputError
from model.types import ConvergenceReason, Dataset, DesignMatrix, FactorScores, FitResult, Hyperparams, Loadings
from optim.base import OptimOptions

logger = logging.getLogger(__name__)

STEP2_FRACTIONS = (1.0, 0.5, 0.25, 0.125)


# ── Step 1 ──

class MarginalObjective:
    """
    Negative marginal log-likelihood over packed (log w, log tau, s) with X and A frozen.

    Points outside the hyperparameter box or with a failed factorization
    score +inf.
    """

    def __init__(self, x: np.ndarray, a: np.ndarray, y: Dataset) -> None:
        self.x = x
        self.a = a
        self.y = y.y
        self.floor = sigma2_floor(y)
        self._key: Optional[bytes] = None
        self._gram = None
        self.evaluations = 0

    def _gram_for(self, v: np.ndarray):
        key = v.tobytes()
        if key != self._key:
            self._gram = build_gram_set(self.x, self.a, vector_to_hyper(v, self.floor), self.y)
            self._key = key
        return self._gram

    def value(self, v: np.ndarray) -> float:
        self.evaluations += 1
        if not hyper_in_box(v):
            return float("inf")
        try:
            return -marginal_loglik(self.y, self._gram_for(v))
        except (FactorizationFailed, InputError):
            return float("inf")

    def gradient(self, v: np.ndarray) -> np.ndarray:
        h = vector_to_hyper(v, self.floor)
        return -hyper_grad_to_vector(theta_gradient(self._gram_for(v), h), h, self.floor)


def fit_hyperparams(
    x: np.ndarray,
    a: np.ndarray,
    y: Dataset,
    h0: Hyperparams,
    optimizer: str = "scg",
    opts: Optional[OptimOptions] = None,
) -> tuple[Hyperparams, float]:
    """
    Maximize the marginal log-likelihood over log θ with X and A frozen.

    Returns:
        (θ̂, marginal log-likelihood at θ̂)
    """
    opts = opts or OptimOptions()
    objective = MarginalObjective(x, a, y)
    start = hyper_to_vector(h0, objective.floor)
    outcome = minimize(optimizer, objective.value, objective.gradient, start, None, opts)
    h_hat = vector_to_hyper(outcome.x_final, objective.floor)
    return h_hat, -outcome.objective_final


def loglik_at(x: np.ndarray, a: np.ndarray, h: Hyperparams, y: Dataset) -> float:
    """Marginal log-likelihood, -inf when a Gram matrix cannot be factorized."""
    try:
        return marginal_loglik(y.y, build_gram_set(x, a, h, y.y))
    except FactorizationFailed:
        return float("-inf")


# ── Step 2 ──

def _best_of_starts(
    neg_obj,
    start: np.ndarray,
    free: np.ndarray,
    rng: np.random.Generator,
    cfg: FitConfig,
    opts: OptimOptions,
) -> np.ndarray:
    """Minimize from the current point and from random perturbations; keep the best."""
    candidates = [start]
    for _ in range(cfg.step2_restarts):
        jitter = rng.normal(0.0, cfg.step2_perturbation, size=start.shape)
        candidates.append(np.where(free, start + jitter, start))

    best_x = start
    best_f = neg_obj(start)[0]
    for cand in candidates:
        outcome = minimize(
            cfg.optimizer,
            lambda v: neg_obj(v)[0],
            lambda v: neg_obj(v)[1],
            cand,
            free,
            opts,
        )
        if outcome.objective_final < best_f:
            best_x, best_f = outcome.x_final, outcome.objective_final
    return best_x


def update_scores(
    x: np.ndarray,
    a: np.ndarray,
    links: list[LinkEvaluator],
    y: Dataset,
    rng: np.random.Generator,
    cfg: FitConfig,
    prior: Optional[PriorSpec] = None,
) -> np.ndarray:
    """Maximize ℓ_i (plus the weighted score prior when given) over each score row in index order."""
    opts = cfg.optim.model_copy(update={"max_iters": cfg.step2_max_iters})
    free = np.ones(a.shape[1], dtype=bool)
    x_new = x.copy()
    for i in range(x.shape[0]):
        def neg_obj(v: np.ndarray, i: int = i):
            value, grad = step2_objective_scores(v, i, links, y.y, a, prior=prior)
            return -value, -grad

        x_new[i] = _best_of_starts(neg_obj, x[i], free, rng, cfg, opts)
    return x_new


def update_loadings(
    x: np.ndarray,
    a: np.ndarray,
    links: list[LinkEvaluator],
    y: Dataset,
    q: DesignMatrix,
    rng: np.random.Generator,
    cfg: FitConfig,
) -> np.ndarray:
    """Maximize ℓ_j over the free entries of each loading row in index order."""
    opts = cfg.optim.model_copy(update={"max_iters": cfg.step2_max_iters})
    a_new = a.copy()
    for j in range(a.shape[0]):
        def neg_obj(v: np.ndarray, j: int = j):
            value, grad = step2_objective_loadings(v, j, links[j], x, y.y, q)
            return -value, -grad

        a_new[j] = _best_of_starts(neg_obj, a[j], q.mask[j], rng, cfg, opts)
    return a_new


def accept_step(
    x: np.ndarray,
    a: np.ndarray,
    x_prop: np.ndarray,
    a_prop: np.ndarray,
    h: Hyperparams,
    y: Dataset,
    loglik: float,
    norms: np.ndarray,
) -> Optional[tuple[np.ndarray, np.ndarray, float]]:
    """
    Take the longest fraction of the Step-2 move whose marginal log-likelihood
    at the current θ is no lower than loglik.

    Returns:
        (X, A, log-likelihood) of the accepted point, or None when every
        fraction lowers the likelihood
    """
    for frac in STEP2_FRACTIONS:
        x_c, a_c = rebalance(x + frac * (x_prop - x), a + frac * (a_prop - a), norms)
        value = loglik_at(x_c, a_c, h, y)
        if value >= loglik:
            if frac < 1.0:
                logger.debug(f"[Iterative] Step 2 damped to fraction {frac}")
            return x_c, a_c, value
    return None


# ── Driver ──

def fit_iterative(
    y: Dataset,
    q: DesignMatrix,
    cfg: FitConfig,
    init: Optional[tuple[FactorScores, Loadings]] = None,
) -> FitResult:
    """
    Alternate Step 1 and Step 2 until the marginal log-likelihood settles.

    Raises:
        DimensionMismatch: data, design and cfg.K disagree
        NonFiniteObjective / FactorizationFailed: numerical breakdown
    """
    cfg.check_against(y, q)
    y_fit, offsets = center_columns(y, cfg.center)
    x0, a0 = init if init is not None else pca_init(y_fit, q)
    x, a = np.array(x0.x), np.array(a0.a)
    norms = column_norms(x)
    h = resolve_theta_init(y_fit, cfg)
    rng = np.random.default_rng(cfg.seed)

    trace: list[tuple[int, float]] = []
    reason = ConvergenceReason.MAX_ITERS
    previous: Optional[float] = None
    iterations = 0

    logger.info(
        f"[Iterative] start N={y.N} J={y.J} K={q.K} outer_max={cfg.outer_max} "
        f"optimizer={cfg.optimizer} x_prior={cfg.x_prior.value} center={cfg.center}"
    )

    for outer in range(cfg.outer_max):
        iterations = outer + 1

        # Step 1
        h, loglik = fit_hyperparams(x, a, y_fit, h, cfg.optimizer, cfg.optim)
        trace.append((outer, -loglik))
        gram = build_gram_set(x, a, h, y_fit.y)
        log_condition_diagnostics(gram, context=f"outer={outer} ")
        logger.info(
            f"[Iterative] outer={outer} loglik={loglik:.6g} "
            f"theta=({h.w:.3g}, {h.tau:.3g}, {h.sigma2:.3g})"
        )

        # Step 3
        if previous is not None and abs(loglik - previous) <= cfg.outer_tol * max(1.0, abs(previous)):
            reason = ConvergenceReason.OBJ_TOL
            break
        previous = loglik

        # Step 2
        links = freeze_links(gram)
        x_prop = update_scores(x, a, links, y_fit, rng, cfg, prior=cfg.prior)
        x_prop, a_scaled = rebalance(x_prop, a, norms)
        a_prop = update_loadings(x_prop, a_scaled, links, y_fit, q, rng, cfg)

        accepted = accept_step(x, a, x_prop, a_prop, h, y_fit, loglik, norms)
        if accepted is None:
            logger.info(f"[Iterative] outer={outer} Step 2 lowers the marginal likelihood; stopping")
            reason = ConvergenceReason.OBJ_TOL
            break
        x, a, _ = accepted

    logger.info(f"[Iterative] done iterations={iterations} reason={reason.value}")
    return finish_fit(x, a, h, y_fit, q, trace, reason, iterations, method="iterative", offsets=offsets)
