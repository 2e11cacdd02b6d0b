"""Gradient descent with backtracking line search, shared by all fits.

The objective protocol separates cheap value evaluation from gradient
evaluation: ``value(x)`` returns ``(f, state)`` where ``state`` carries
whatever factorizations the gradient needs, and ``grad(x, state)`` turns
that into a gradient without refactorizing. Line-search probes then only
pay for value evaluations.
"""

from dataclasses import dataclass

import numpy as np

from .core import OptimizationFailedError

__all__ = ["OptimizerConfig", "DescentResult", "gradient_descent"]


@dataclass(frozen=True)
class OptimizerConfig:
    """Constants of the descent loop.

    Stops when the gradient infinity-norm drops below `grad_tol`, when the
    relative objective decrease falls below `f_tol`, or after `max_iters`
    accepted iterations. Backtracking uses Armijo sufficient decrease.
    """

    max_iters: int = 500
    step_init: float = 1.0
    grad_tol: float = 1e-5
    f_tol: float = 1e-9
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    min_step: float = 1e-14

    def validate(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("step_init", "grad_tol", "f_tol", "shrink",
                     "sufficient_decrease", "min_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.shrink >= 1.0:
            raise ValueError("shrink must be < 1")


@dataclass(frozen=True)
class DescentResult:
    x: np.ndarray
    fval: float
    iterations: int
    converged: bool
    status: str


def gradient_descent(value, grad, x0, cfg: OptimizerConfig) -> DescentResult:
    """Minimize a smooth objective by steepest descent with backtracking.

    Parameters
    ----------
    value : callable
        ``value(x) -> (f, state)``; may return a non-finite f to signal an
        infeasible probe.
    grad : callable
        ``grad(x, state) -> g`` with `state` from the matching `value` call.
    x0 : array
        Starting point.
    cfg : OptimizerConfig

    Returns
    -------
    DescentResult
        The accepted-step objective sequence is non-increasing and the
        result is deterministic in its inputs.

    Raises
    ------
    OptimizationFailedError
        If the objective is non-finite at `x0`.
    """
    cfg.validate()
    x = np.asarray(x0, dtype=float).copy()
    f, state = value(x)
    if not np.isfinite(f):
        raise OptimizationFailedError("objective is non-finite at the start point")

    step = cfg.step_init
    status = "max-iters"
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = grad(x, state)
        if not np.all(np.isfinite(g)):
            status = "non-finite-gradient"
            break
        gmax = float(np.max(np.abs(g)))
        if gmax < cfg.grad_tol:
            status = "grad-tol"
            converged = True
            break

        slope = -float(g @ g)
        t = step
        accepted = False
        while t >= cfg.min_step:
            x_new = x - t * g
            f_new, state_new = value(x_new)
            if np.isfinite(f_new) and f_new <= f + cfg.sufficient_decrease * t * slope:
                accepted = True
                break
            t *= cfg.shrink
        if not accepted:
            # No descent possible along -g at any representable step;
            # treat the current point as the attained minimum.
            status = "line-search-stalled"
            converged = True
            break

        decrease = f - f_new
        x, f, state = x_new, f_new, state_new
        step = min(cfg.step_init, 2.0 * t)
        if decrease <= cfg.f_tol * max(1.0, abs(f)):
            status = "f-tol"
            converged = True
            break

    return DescentResult(x=x, fval=float(f), iterations=it,
                         converged=converged, status=status)
