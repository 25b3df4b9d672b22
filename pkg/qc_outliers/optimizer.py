from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from qc_outliers.errors import NonFiniteError
from qc_outliers.potential import ArrayLike, PotentialField, PotentialMode

logger = logging.getLogger(__name__)

CURVATURE_EPS = 1e-12
# the interpolation step may go at most this many times further than the backtracked one
EXTRAPOLATION_LIMIT = 16.0

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


class BfgsConfig(BaseModel):
    """Stopping rules and line search constants of `minimize`."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    grad_tol: float = Field(1e-7, gt=0)
    step_tol: float = Field(1e-10, gt=0)
    max_iters: int = Field(200, gt=0)
    armijo_c: float = Field(1e-4, gt=0, lt=1)
    backtrack_factor: float = Field(0.5, gt=0, lt=1)
    # inverse mode only: a descent leaving the data box padded by this many sigmas is stopped
    escape_margin: float = Field(4.0, gt=0)
    # longest step of `descend_point`, in sigmas
    descent_step: float = Field(0.25, gt=0)


@dataclass(frozen=True, eq=False)
class MinimizeOutcome:
    x_star: np.ndarray
    f_star: float
    iterations: int
    converged: bool
    escaped: bool = False
    resets: int = 0


def _checked_value(f: Objective, x: np.ndarray) -> float:
    value = float(f(x))
    if not np.isfinite(value):
        raise NonFiniteError(f"objective is {value} at {x.tolist()}")
    return value


def _checked_gradient(grad: Gradient, x: np.ndarray) -> np.ndarray:
    g = np.array(grad(x), dtype=float).reshape(x.shape)
    if not np.isfinite(g).all():
        raise NonFiniteError(f"gradient is {g.tolist()} at {x.tolist()}")
    return g


def _line_search(f: Objective, x: np.ndarray, fx: float, p: np.ndarray, slope: float, cfg: BfgsConfig,
                 alpha_max: float) -> Optional[tuple[np.ndarray, float]]:
    """
    Armijo backtracking from the unit step, then one step to the minimum of the quadratic through
    f(x), the slope and the accepted trial, kept only when it satisfies Armijo and lowers f further.
    Returns None when no acceptable step is longer than `cfg.step_tol`.
    """
    p_norm = float(np.linalg.norm(p))
    alpha = 1.0
    while True:
        x_new = x + alpha * p
        f_new = _checked_value(f, x_new)
        if f_new <= fx + cfg.armijo_c * alpha * slope:
            break
        alpha *= cfg.backtrack_factor
        if alpha * p_norm <= cfg.step_tol:
            return None

    curvature = f_new - fx - alpha * slope
    if curvature > 0:
        alpha_q = -slope * alpha * alpha / (2 * curvature)
        if alpha_q != alpha and 0 < alpha_q <= min(alpha_max, EXTRAPOLATION_LIMIT * alpha):
            x_q = x + alpha_q * p
            f_q = float(f(x_q))
            if np.isfinite(f_q) and f_q < f_new and f_q <= fx + cfg.armijo_c * alpha_q * slope:
                return x_q, f_q
    return x_new, f_new


def minimize(f: Objective, grad: Gradient, x0: ArrayLike, cfg: BfgsConfig = BfgsConfig(),
             halt: Optional[Callable[[np.ndarray], bool]] = None,
             callback: Optional[Callable[[np.ndarray, float], None]] = None,
             max_step: Optional[float] = None) -> MinimizeOutcome:
    """
    Full-memory BFGS with Armijo backtracking, starting from the identity inverse Hessian.

    After the first accepted step, and after every reset, the identity is scaled by s.y / y.y
    before the rank-two update. The inverse Hessian approximation is reset whenever the curvature
    condition s.y > 1e-12 |s| |y| fails, and whenever it stops producing a descent direction.
    No step is longer than `max_step`.
    Reaching `cfg.max_iters` is not an error: the last iterate is returned with `converged=False`.
    `halt` is checked on every accepted iterate; when it is true the run stops with `escaped=True`.
    `callback(x, f(x))` sees every accepted iterate.
    """
    if max_step is not None and not max_step > 0:
        raise ValueError(f"max_step must be positive, got {max_step}")
    x = np.array(x0, dtype=float).reshape(-1)
    fx = _checked_value(f, x)
    g = _checked_gradient(grad, x)
    eye = np.eye(x.size)
    h = eye.copy()
    fresh = True
    resets = 0

    for it in range(cfg.max_iters):
        if np.linalg.norm(g) <= cfg.grad_tol:
            return MinimizeOutcome(x, fx, it, True, False, resets)
        p = -h @ g
        slope = float(g @ p)
        if slope >= 0:
            h = eye.copy()
            fresh = True
            resets += 1
            p = -g
            slope = -float(g @ g)

        alpha_max = math.inf
        if max_step is not None:
            p_norm = float(np.linalg.norm(p))
            if p_norm > max_step:
                p *= max_step / p_norm
                slope *= max_step / p_norm
            alpha_max = max_step / float(np.linalg.norm(p))

        accepted = _line_search(f, x, fx, p, slope, cfg, alpha_max)
        if accepted is None:
            # no acceptable step longer than step_tol along a descent direction
            return MinimizeOutcome(x, fx, it, True, False, resets)
        x_new, f_new = accepted

        g_new = _checked_gradient(grad, x_new)
        s = x_new - x
        y = g_new - g
        x, fx, g = x_new, f_new, g_new
        if callback is not None:
            callback(x, fx)

        if halt is not None and halt(x):
            return MinimizeOutcome(x, fx, it + 1, False, True, resets)
        if np.linalg.norm(s) <= cfg.step_tol:
            return MinimizeOutcome(x, fx, it + 1, True, False, resets)

        sy = float(s @ y)
        if sy <= CURVATURE_EPS * np.linalg.norm(s) * np.linalg.norm(y):
            h = eye.copy()
            fresh = True
            resets += 1
            continue
        if fresh:
            h = (sy / float(y @ y)) * eye
            fresh = False
        rho = 1.0 / sy
        left = eye - rho * np.outer(s, y)
        h = left @ h @ left.T + rho * np.outer(s, s)

    converged = bool(np.linalg.norm(g) <= cfg.grad_tol)
    return MinimizeOutcome(x, fx, cfg.max_iters, converged, False, resets)


def descend_point(field: PotentialField, x0: ArrayLike, cfg: BfgsConfig = BfgsConfig()) -> MinimizeOutcome:
    """
    Slide `x0` down the potential surface of `field` to the bottom of its basin.

    The descent runs in coordinates measured in sigmas from `x0`, where the potential of a lone point is
    |u - u_1|^2 / 2, so the identity is the right first guess for the inverse Hessian. `cfg`
    tolerances apply in those coordinates, and no step is longer than `cfg.descent_step` sigmas.
    The returned `x_star` is in data coordinates.

    In inverse mode the negated potential falls without bound away from the data, so the descent
    is stopped once it leaves the data bounding box padded by `cfg.escape_margin` sigmas.
    """
    x0 = field.dataset.query(x0)
    sigma = field.sigma

    def f(u: np.ndarray) -> float:
        return field.potential(x0 + sigma * u)

    def grad(u: np.ndarray) -> np.ndarray:
        return sigma * field.potential_gradient(x0 + sigma * u)

    halt = None
    if field.mode is PotentialMode.INVERSE:
        lo, hi = field.support_box(cfg.escape_margin)

        def halt(u: np.ndarray) -> bool:
            x = x0 + sigma * u
            return bool((x < lo).any() or (x > hi).any())

    outcome = minimize(f, grad, np.zeros_like(x0), cfg, halt, max_step=cfg.descent_step)
    logger.debug("descent from %s: %d iterations, converged=%s, escaped=%s",
                 x0.tolist(), outcome.iterations, outcome.converged, outcome.escaped)
    return replace(outcome, x_star=x0 + sigma * outcome.x_star)
