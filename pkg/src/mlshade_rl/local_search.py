"""Late-phase local refinement of the incumbent.

For a purely box-constrained problem an SQP step reduces to a projected
quasi-Newton step, so that is what runs here: BFGS on central-difference
gradients with an Armijo backtracking search along the projected path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .engine import Individual
from .problem import Bounds

P_LS_SUCCESS = 0.1
P_LS_FAILURE = 0.01


@dataclass
class LocalSearchState:
    P_LS: float = P_LS_FAILURE
    nfes_LS: int = 1000
    active_after: float = 0.85


class QuasiNewtonResult(NamedTuple):
    x: np.ndarray
    fun: float
    evals: int
    stop: str


class _BudgetExhausted(Exception):
    pass


def _finite_difference_gradient(fun, x, fx, lo, hi):
    g = np.empty_like(x)
    for j in range(x.size):
        h = 1e-6 * max(1.0, abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] = min(x[j] + h, hi[j])
        xm[j] = max(x[j] - h, lo[j])
        g[j] = (fun(xp) - fun(xm)) / (xp[j] - xm[j])
    return g


def bounded_quasi_newton(f: Callable[[np.ndarray], float], x0, budget: int,
                         bounds: Bounds | None = None, f0: float | None = None,
                         grad_tol: float = 1e-10, step_tol: float = 1e-12,
                         armijo: float = 1e-4, max_halvings: int = 50) -> QuasiNewtonResult:
    """Minimize ``f`` inside a box from ``x0`` with at most ``budget`` evaluations.

    ``f0`` may supply the already known value at ``x0`` (saves one call).
    The best point seen is returned, so the result is never worse than the
    start. ``stop`` is one of ``"budget"``, ``"gradient"``, ``"step"``.
    """
    if bounds is None:
        bounds = f.bounds
    lo, hi = bounds.lower, bounds.upper
    evals = 0
    best_x = bounds.clip(np.asarray(x0, dtype=float))
    best_f = np.inf

    def fun(x):
        nonlocal evals, best_x, best_f
        if evals >= budget:
            raise _BudgetExhausted
        evals += 1
        value = f(x)
        if value < best_f:
            best_x, best_f = x.copy(), value
        return value

    x = best_x.copy()
    stop = "budget"
    try:
        if f0 is None:
            fx = fun(x)
        else:
            fx = best_f = float(f0)
        g = _finite_difference_gradient(fun, x, fx, lo, hi)
        H = np.eye(x.size)
        scaled = False
        while True:
            if np.max(np.abs(x - np.clip(x - g, lo, hi))) < grad_tol:
                stop = "gradient"
                break
            # variables pinned at a bound with the gradient pushing outward stay fixed
            free = ~(((x <= lo) & (g > 0)) | ((x >= hi) & (g < 0)))
            d = np.zeros_like(x)
            d[free] = -(H[np.ix_(free, free)] @ g[free])
            if np.dot(g, d) >= 0.0:
                H = np.eye(x.size)
                d = np.where(free, -g, 0.0)
            alpha = 1.0
            for _ in range(max_halvings):
                xn = np.clip(x + alpha * d, lo, hi)
                step = xn - x
                if np.linalg.norm(step) < step_tol:
                    break
                fn = fun(xn)
                if fn <= fx + armijo * np.dot(g, step):
                    break
                alpha *= 0.5
            else:
                stop = "step"
                break
            if np.linalg.norm(step) < step_tol:
                stop = "step"
                break
            # one extra probe at the minimizer of the quadratic through f(0), f'(0), f(alpha)
            slope = float(np.dot(g, d))
            curv = fn - fx - alpha * slope
            if curv > 0.0:
                a_star = -slope * alpha * alpha / (2.0 * curv)
                if 0.0 < a_star <= 4.0 * alpha and abs(a_star - alpha) > 1e-3 * alpha:
                    xq = np.clip(x + a_star * d, lo, hi)
                    fq = fun(xq)
                    if fq < fn:
                        xn, fn = xq, fq
                        step = xn - x
            gn = _finite_difference_gradient(fun, xn, fn, lo, hi)
            s = step
            y = gn - g
            sy = float(np.dot(s, y))
            if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
                if not scaled:
                    H = (sy / float(np.dot(y, y))) * np.eye(x.size)
                    scaled = True
                rho = 1.0 / sy
                Hy = H @ y
                H = (H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                     + (rho * rho * float(np.dot(y, Hy)) + rho) * np.outer(s, s))
            x, fx, g = xn, fn, gn
    except _BudgetExhausted:
        stop = "budget"
    return QuasiNewtonResult(best_x, float(best_f), evals, stop)


def maybe_local_search(best: Individual, problem, state: LocalSearchState, nfes: int,
                       nfes_max: int, rng: np.random.Generator):
    """Refine ``best`` with probability ``state.P_LS``.

    Returns ``(refined or None, evaluations used, state)``. A successful
    refinement raises ``P_LS`` to 0.1; an unsuccessful one drops it to 0.01.
    """
    if not rng.random() < state.P_LS:
        return None, 0, state
    budget = min(state.nfes_LS, nfes_max - nfes)
    if budget < 2 * best.x.size + 2:
        return None, 0, state
    res = bounded_quasi_newton(problem, best.x, budget, bounds=problem.bounds, f0=best.fitness)
    if res.fun < best.fitness:
        state.P_LS = P_LS_SUCCESS
        return Individual(res.x, res.fun), res.evals, state
    state.P_LS = P_LS_FAILURE
    return None, res.evals, state
