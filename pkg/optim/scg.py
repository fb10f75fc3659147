"""
Scaled Conjugate Gradient minimizer.

Second-order information along the search direction comes from a finite
difference of gradients; a Levenberg-Marquardt style scale lambda keeps the
local quadratic model positive definite and is raised or lowered by the
comparison ratio (thresholds 0.25 / 0.75). The search direction is reset to
steepest descent every n successful steps, n being the number of free
coordinates.
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

LAMBDA_MIN = 1e-15
LAMBDA_MAX = 1e100
MAX_NONFINITE_STEPS = 30


def scg_minimize(
    obj: Objective,
    grad: Gradient,
    x0: np.ndarray,
    mask: np.ndarray | None = None,
    opts: OptimOptions | None = None,
) -> OptimOutcome:
    """
    Minimize obj over the unmasked coordinates of x0.

    Raises:
        NonFiniteObjective: obj or grad is non-finite at an accepted point, or
            repeated trial steps kept producing non-finite values
    """
    opts = opts or OptimOptions()
    x = np.array(x0, dtype=float, copy=True)
    free = check_mask(x, mask)
    n_free = int(free.sum())

    f_old = finite_or_raise(float(obj(x)), "x0")
    trace = [f_old]

    if n_free == 0:
        return OptimOutcome(x, f_old, 0, ConvergenceReason.GRAD_TOL, tuple(trace))

    g_new = masked(np.asarray(grad(x), dtype=float), free)
    if not np.all(np.isfinite(g_new)):
        raise NonFiniteObjective("gradient is not finite at x0")
    if np.max(np.abs(g_new)) <= opts.grad_tol:
        return OptimOutcome(x, f_old, 0, ConvergenceReason.GRAD_TOL, tuple(trace))

    lam = opts.scg_lambda0
    d = -g_new
    g_old = g_new
    success = True
    n_success = 0
    n_nonfinite = 0
    mu = kappa = theta = 0.0
    reason = ConvergenceReason.MAX_ITERS
    iteration = 0

    for iteration in range(1, opts.max_iters + 1):
        if success:
            mu = float(d @ g_new)
            if mu >= 0:
                d = -g_new
                mu = float(d @ g_new)
            kappa = float(d @ d)
            if kappa < np.finfo(float).eps ** 2:
                reason = ConvergenceReason.GRAD_TOL
                iteration -= 1
                break
            sigma = opts.scg_sigma0 / np.sqrt(kappa)
            x_plus = x.copy()
            x_plus[free] += sigma * d[free]
            g_plus = masked(np.asarray(grad(x_plus), dtype=float), free)
            theta = float(d @ (g_plus - g_new)) / sigma

        # Scale the curvature so the local model stays positive definite
        delta = theta + lam * kappa
        if delta <= 0:
            delta = lam * kappa
            lam = lam - theta / kappa
        alpha = -mu / delta

        x_new = x.copy()
        x_new[free] += alpha * d[free]
        f_new = float(obj(x_new))

        if np.isfinite(f_new):
            n_nonfinite = 0
            comparison = 2.0 * (f_new - f_old) / (alpha * mu)
        else:
            n_nonfinite += 1
            if n_nonfinite > MAX_NONFINITE_STEPS:
                raise NonFiniteObjective(
                    f"{n_nonfinite} consecutive trial steps gave a non-finite objective")
            comparison = -np.inf

        if comparison >= 0 and f_new <= f_old:
            success = True
            n_success += 1
            x = x_new
            change = relative_change(f_new, f_old)
            f_old = f_new
            g_old = g_new
            g_new = masked(np.asarray(grad(x), dtype=float), free)
            if not np.all(np.isfinite(g_new)):
                raise NonFiniteObjective(f"gradient is not finite at iteration {iteration}")
        else:
            success = False
            change = None

        trace.append(f_old)
        logger.debug(
            f"[SCG] iter={iteration} f={f_old:.8g} lambda={lam:.3e} "
            f"accepted={success}"
        )

        if success:
            if np.max(np.abs(g_new)) <= opts.grad_tol:
                reason = ConvergenceReason.GRAD_TOL
                break
            if change is not None and change <= opts.obj_tol:
                reason = ConvergenceReason.OBJ_TOL
                break

        if comparison < 0.25:
            lam = min(4.0 * lam, LAMBDA_MAX)
        elif comparison > 0.75:
            lam = max(0.5 * lam, LAMBDA_MIN)

        if lam >= LAMBDA_MAX:
            reason = ConvergenceReason.OBJ_TOL
            break

        if n_success == n_free:
            d = -g_new
            n_success = 0
        elif success:
            gamma = float((g_old - g_new) @ g_new) / mu
            d = gamma * d - g_new

    logger.debug(
        f"[SCG] done iterations={iteration} f={f_old:.8g} reason={reason.value}"
    )
    return OptimOutcome(x, f_old, iteration, reason, tuple(trace))
