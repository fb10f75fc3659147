"""
Joint MAP estimation of scores, free loadings and hyperparameters.

Minimizes the negative joint log posterior over one packed vector; the
design zero pattern is enforced by the optimizer mask. Score columns keep
the norms of their starting values throughout.
"""

import logging
from typing import Optional

import numpy as np

from estimator.common import center_columns, finish_fit, minimize
from estimator.initialization import pca_init, sigma2_floor, theta_init
from estimator.packing import ParamPacker, column_norms
from estimator.settings import FitConfig
from gp.inference import PriorSpec, grad_joint, joint_log_posterior
from gp.kernel import build_gram_set
from model.errors import FactorizationFailed, InputError
from model.types import Dataset, DesignMatrix, FactorScores, FitResult, Hyperparams, Loadings

logger = logging.getLogger(__name__)


class JointObjective:
    """
    Negative joint log posterior and its gradient over packed vectors.

    Trial points outside the hyperparameter box, with a collapsed score
    column, or whose Gram matrices cannot be factorized score +inf so the
    minimizer rejects the step. The Gram set of the last evaluated vector is
    cached so the gradient call that follows an objective call reuses it.
    """

    def __init__(self, y: Dataset, q: DesignMatrix, prior: PriorSpec, packer: ParamPacker) -> None:
        self.y = y.y
        self.q = q
        self.prior = prior
        self.packer = packer
        self._key: Optional[bytes] = None
        self._gram = None
        self.evaluations = 0

    def _gram_for(self, v: np.ndarray):
        key = v.tobytes()
        if key != self._key:
            x, a, h = self.packer.unpack(v)
            self._gram = build_gram_set(x, a, h, self.y)
            self._key = key
        return self._gram

    def value(self, v: np.ndarray) -> float:
        self.evaluations += 1
        if not self.packer.theta_in_box(v):
            return float("inf")
        try:
            x, a, h = self.packer.unpack(v)
            if not np.all(np.isfinite(x)):
                return float("inf")
            gram = self._gram_for(v)
        except (FactorizationFailed, InputError):
            return float("inf")
        return -joint_log_posterior(x, a, h, self.y, self.q, self.prior, gram=gram)

    def gradient(self, v: np.ndarray) -> np.ndarray:
        x, a, h = self.packer.unpack(v)
        gram = self._gram_for(v)
        grads = grad_joint(x, a, h, self.y, self.q, self.prior, gram=gram)
        return -self.packer.pack_gradient(v, grads.grad_x, grads.grad_a, grads.grad_theta, h)


def resolve_theta_init(y: Dataset, cfg: FitConfig) -> Hyperparams:
    base = theta_init(y)
    overrides = cfg.theta_init.model_dump(exclude_none=True)
    return Hyperparams(**{**base.as_dict(), **overrides})


def fit_joint_map(
    y: Dataset,
    q: DesignMatrix,
    cfg: FitConfig,
    init: Optional[tuple[FactorScores, Loadings]] = None,
) -> FitResult:
    """
    Maximize ℓ_F(X, A, θ) from PCA (or given) starting values.

    Raises:
        DimensionMismatch: data, design and cfg.K disagree
        NonFiniteObjective / FactorizationFailed: numerical breakdown
    """
    cfg.check_against(y, q)
    y_fit, offsets = center_columns(y, cfg.center)
    x0, a0 = init if init is not None else pca_init(y_fit, q)
    h0 = resolve_theta_init(y_fit, cfg)

    packer = ParamPacker(n=y.N, q=q, floor=sigma2_floor(y_fit), x_norms=column_norms(x0.x))
    objective = JointObjective(y_fit, q, cfg.prior, packer)

    logger.info(
        f"[JointMAP] start N={y.N} J={y.J} K={q.K} optimizer={cfg.optimizer} "
        f"x_prior={cfg.x_prior.value} center={cfg.center} "
        f"theta0=({h0.w:.3g}, {h0.tau:.3g}, {h0.sigma2:.3g})"
    )

    outcome = minimize(
        cfg.optimizer,
        objective.value,
        objective.gradient,
        packer.pack(x0.x, a0.a, h0),
        packer.mask(),
        cfg.optim,
    )

    x_hat, a_hat, h_hat = packer.unpack(outcome.x_final)
    logger.info(
        f"[JointMAP] done iterations={outcome.iterations} reason={outcome.converged.value} "
        f"objective={outcome.objective_final:.6g} evaluations={objective.evaluations} "
        f"theta=({h_hat.w:.3g}, {h_hat.tau:.3g}, {h_hat.sigma2:.3g})"
    )

    return finish_fit(
        x_hat,
        a_hat,
        h_hat,
        y_fit,
        q,
        trace=list(enumerate(outcome.trace)),
        converged=outcome.converged,
        iterations=outcome.iterations,
        method="joint-map",
        offsets=offsets,
    )
