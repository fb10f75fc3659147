"""
Gradient descent with Armijo backtracking.

Each iteration starts from twice the previously accepted step, halves it
until the sufficient-decrease condition holds, and only ever accepts steps
that lower the objective.
"""

import logging

import numpy as np

from model.errors import NonFiniteObjective
from model.types import ConvergenceReason
from optim.base import (
    Gradient,
    Objective,
    OptimOptions,
    OptimOutcome,
    check_mask,
    finite_or_raise,
    masked,
    relative_change,
)

logger = logging.getLogger(__name__)

MAX_BACKTRACKS = 60


def gd_minimize(
    obj: Objective,
    grad: Gradient,
    x0: np.ndarray,
    mask: np.ndarray | None = None,
    opts: OptimOptions | None = None,
) -> OptimOutcome:
    """Minimize obj over the unmasked coordinates of x0 by backtracking gradient descent."""
    opts = opts or OptimOptions()
    x = np.array(x0, dtype=float, copy=True)
    free = check_mask(x, mask)

    f = finite_or_raise(float(obj(x)), "x0")
    trace = [f]
    if not free.any():
        return OptimOutcome(x, f, 0, ConvergenceReason.GRAD_TOL, tuple(trace))

    step = opts.gd_step
    reason = ConvergenceReason.MAX_ITERS
    iteration = 0

    for iteration in range(1, opts.max_iters + 1):
        g = masked(np.asarray(grad(x), dtype=float), free)
        if not np.all(np.isfinite(g)):
            raise NonFiniteObjective(f"gradient is not finite at iteration {iteration}")
        if np.max(np.abs(g)) <= opts.grad_tol:
            reason = ConvergenceReason.GRAD_TOL
            iteration -= 1
            break

        g_sq = float(g @ g)
        trial = min(2.0 * step, 1e6)
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            x_new = x.copy()
            x_new[free] -= trial * g[free]
            f_new = float(obj(x_new))
            if np.isfinite(f_new) and f_new <= f - opts.gd_armijo * trial * g_sq:
                accepted = True
                break
            trial *= opts.gd_backtrack

        if not accepted:
            # no step of any length decreases f along -g: numerically stationary
            reason = ConvergenceReason.OBJ_TOL
            trace.append(f)
            break

        change = relative_change(f_new, f)
        x, f, step = x_new, f_new, trial
        trace.append(f)
        logger.debug(f"[GD] iter={iteration} f={f:.8g} step={step:.3e}")

        if change <= opts.obj_tol:
            reason = ConvergenceReason.OBJ_TOL
            break

    logger.debug(f"[GD] done iterations={iteration} f={f:.8g} reason={reason.value}")
    return OptimOutcome(x, f, iteration, reason, tuple(trace))
