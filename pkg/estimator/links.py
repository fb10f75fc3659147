"""
Posterior link curves for fitted models.
"""

from typing import Optional

import numpy as np
import pandas as pd

from gp.inference import posterior_f_mean, posterior_f_var
from gp.kernel import GramSet, build_gram_set
from model.errors import IndexOutOfRange
from model.types import FitResult


def fit_gram(fit: FitResult) -> GramSet:
    """Rebuild the Gram set at the fitted estimates."""
    return build_gram_set(fit.x_hat, fit.a_hat, fit.theta_hat, fit.dataset.y)


def _check_item(fit: FitResult, j: int) -> None:
    if not 0 <= j < fit.a_hat.a.shape[0]:
        raise IndexOutOfRange(f"item j={j} outside [0, {fit.a_hat.a.shape[0]})")


def predict_links(fit: FitResult, grid, j: int, gram: Optional[GramSet] = None) -> np.ndarray:
    """Posterior mean of f_j (offset included) at each grid point. An empty grid gives an empty vector."""
    _check_item(fit, j)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        return np.empty(0)
    gram = gram or fit_gram(fit)
    return posterior_f_mean(grid, j, gram, fit.theta_hat) + fit.offsets[j]


def predict_links_var(fit: FitResult, grid, j: int, gram: Optional[GramSet] = None) -> np.ndarray:
    """Posterior variance of f_j at each grid point."""
    _check_item(fit, j)
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        return np.empty(0)
    gram = gram or fit_gram(fit)
    return posterior_f_var(grid, j, gram, fit.theta_hat)


def link_grid(t: np.ndarray, grid_size: int, margin: float = 0.1) -> np.ndarray:
    """Equispaced grid spanning the observed indices widened by margin·range on each side."""
    lo, hi = float(np.min(t)), float(np.max(t))
    pad = margin * (hi - lo) if hi > lo else margin * max(1.0, abs(lo))
    return np.linspace(lo - pad, hi + pad, grid_size)


def link_curves(fit: FitResult, grid_size: int, with_band: bool = True) -> pd.DataFrame:
    """
    Long-format link curves: one row per (item, grid point).

    Columns: item, t, f_mean and, with with_band, f_lower / f_upper at ±2 posterior sd.
    """
    gram = fit_gram(fit)
    frames = []
    for j in range(gram.J):
        grid = link_grid(gram[j].t, grid_size)
        frame = pd.DataFrame({
            "item": j + 1,
            "t": grid,
            "f_mean": predict_links(fit, grid, j, gram=gram),
        })
        if with_band:
            sd = np.sqrt(predict_links_var(fit, grid, j, gram=gram))
            frame["f_lower"] = frame["f_mean"] - 2.0 * sd
            frame["f_upper"] = frame["f_mean"] + 2.0 * sd
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
