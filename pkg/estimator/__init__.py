"""
Estimation module for nslfa.

Provides PCA initialization, the joint MAP and iterative fitting
procedures, and posterior link prediction on user grids.
"""

from .initialization import pca_init, theta_init
from .iterative import fit_hyperparams, fit_iterative
from .joint_map import fit_joint_map
from .links import link_curves, predict_links, predict_links_var
from .settings import FitConfig, ThetaInit

__all__ = [
    "fit",
    "pca_init",
    "theta_init",
    "fit_hyperparams",
    "fit_iterative",
    "fit_joint_map",
    "link_curves",
    "predict_links",
    "predict_links_var",
    "FitConfig",
    "ThetaInit",
]


def fit(y, q, cfg, init=None):
    """Dispatch on cfg.method."""
    if cfg.method == "iterative":
        return fit_iterative(y, q, cfg, init=init)
    return fit_joint_map(y, q, cfg, init=init)
