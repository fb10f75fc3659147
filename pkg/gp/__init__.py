"""
Gaussian-process module for nslfa.

Provides the squared-exponential Gram set, its derivative matrices, the
likelihood/posterior objectives and posterior link prediction.
"""

from .inference import (
    LinkEvaluator,
    PriorSpec,
    XPrior,
    grad_joint,
    joint_log_posterior,
    marginal_loglik,
    posterior_f_cov_train,
    posterior_f_mean,
    posterior_f_train,
    step2_objective_loadings,
    step2_objective_scores,
)
from .kernel import GramSet, build_gram_set, dK_da, dK_dtheta, dK_dx, se_kernel

__all__ = [
    "LinkEvaluator",
    "PriorSpec",
    "XPrior",
    "grad_joint",
    "joint_log_posterior",
    "marginal_loglik",
    "posterior_f_cov_train",
    "posterior_f_mean",
    "posterior_f_train",
    "step2_objective_loadings",
    "step2_objective_scores",
    "GramSet",
    "build_gram_set",
    "dK_da",
    "dK_dtheta",
    "dK_dx",
    "se_kernel",
]
