"""
Helpers shared by the NSLFA fitting procedures.
"""

import logging

import numpy as np

from gp.inference import posterior_f_train_all
from gp.kernel import build_gram_set, log_condition_diagnostics
from model.types import ConvergenceReason, Dataset, DesignMatrix, FactorScores, FitResult, Hyperparams
from model.design import apply_zero_pattern
from optim.base import OptimOptions, OptimOutcome
from optim.gd import gd_minimize
from optim.scg import scg_minimize

logger = logging.getLogger(__name__)

_MINIMIZERS = {
    "scg": scg_minimize,
    "gd": gd_minimize,
}


def minimize(name: str, obj, grad, x0: np.ndarray, mask: np.ndarray | None, opts: OptimOptions) -> OptimOutcome:
    return _MINIMIZERS[name](obj, grad, x0, mask, opts)


def center_columns(y: Dataset, center: bool) -> tuple[Dataset, np.ndarray]:
    """(Y minus its column means, the means); zero offsets when center is off."""
    offsets = y.y.mean(axis=0) if center else np.zeros(y.J)
    if not center:
        return y, offsets
    return Dataset(y.y - offsets, labels=y.labels, columns=y.columns), offsets


def finish_fit(
    x: np.ndarray,
    a: np.ndarray,
    h: Hyperparams,
    y: Dataset,
    q: DesignMatrix,
    trace: list[tuple[int, float]],
    converged: ConvergenceReason,
    iterations: int,
    method: str,
    offsets: np.ndarray | None = None,
) -> FitResult:
    """Rebuild the Gram set at the final estimates and assemble the FitResult."""
    offsets = np.zeros(y.J) if offsets is None else offsets
    loadings = apply_zero_pattern(a, q)
    gram = build_gram_set(x, loadings.a, h, y)
    log_condition_diagnostics(gram, context=f"{method} final ")
    result = FitResult(
        x_hat=FactorScores(x),
        a_hat=loadings,
        theta_hat=h,
        f_hat=posterior_f_train_all(gram) + offsets,
        objective_trace=tuple((int(i), float(v)) for i, v in trace),
        converged=converged,
        iterations=iterations,
        dataset=y,
        method=method,
        offsets=offsets,
    )

    bounds = result.bounds_report()
    if bounds["x_rows_over_bound"] or bounds["a_rows_over_bound"]:
        logger.warning(
            f"[Fit] estimates exceed row-norm bounds: "
            f"max_x={bounds['max_x_norm']:.3f}/{bounds['x_bound']} "
            f"max_a={bounds['max_a_norm']:.3f}/{bounds['a_bound']}"
        )
    return result
