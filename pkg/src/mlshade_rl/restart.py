"""Stagnation tracking and diversity-restoring replacement.

An individual counts as stagnant once its trial has lost more than
``2 * D`` generations running while the population volume metric is below
0.001. Stagnant members (except the current best) are overwritten by a
horizontal or vertical crossover offspring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engine import Archive, Population, bound_repair
from .errors import InvalidArgumentError
from .problem import Bounds

VOL_THRESHOLD = 1e-3


@dataclass
class StagnationTracker:
    counters: np.ndarray
    count_threshold: int
    vol_threshold: float = VOL_THRESHOLD
    vol: float = math.inf

    @classmethod
    def create(cls, n: int, dim: int, vol_threshold: float = VOL_THRESHOLD,
               count_threshold: int | None = None) -> "StagnationTracker":
        threshold = 2 * dim if count_threshold is None else count_threshold
        return cls(np.zeros(n, dtype=int), threshold, vol_threshold)

    def reorder(self, indices) -> None:
        """Follow a permutation or subset applied to the population."""
        self.counters = self.counters[np.asarray(indices)]


def record_counters(tracker: StagnationTracker, trial_fitness, target_fitness) -> np.ndarray:
    """Increment where the trial was worse than its target, reset otherwise."""
    worse = np.asarray(trial_fitness) > np.asarray(target_fitness)
    tracker.counters = np.where(worse, tracker.counters + 1, 0)
    return tracker.counters


def volume_metric(X, bounds: Bounds) -> float:
    """sqrt(Vol_pop / Vol_bnd) with Vol_bnd = sqrt(prod(ub - lb)), Vol_pop = sqrt(sum(spread) / 2).

    Computed in log space: the product of box widths overflows a double
    for wide boxes in high dimension.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise InvalidArgumentError("volume metric needs at least two individuals")
    spread = float(np.sum(X.max(axis=0) - X.min(axis=0)))
    if spread <= 0.0:
        return 0.0
    log_pop = 0.5 * math.log(spread / 2.0)
    log_bnd = 0.5 * float(np.sum(np.log(bounds.width)))
    return math.exp(0.5 * (log_pop - log_bnd))


def horizontal_combination(x1, x2, rd1, rnds) -> np.ndarray:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return rd1 * x1 + (1.0 - rd1) * x2 + rnds * (x1 - x2)


def horizontal_crossover(x1, x2, rng: np.random.Generator, bounds: Bounds | None = None) -> np.ndarray:
    """Per-dimension blend of two individuals plus a random multiple of their difference."""
    x1 = np.asarray(x1, dtype=float)
    rd1 = rng.random(x1.size)
    rnds = rng.uniform(-1.0, 1.0, x1.size)
    child = horizontal_combination(x1, x2, rd1, rnds)
    return child if bounds is None else bound_repair(child, x1, bounds)


def vertical_crossover(x, d1: int, d2: int, rng: np.random.Generator | None = None,
                       bounds: Bounds | None = None, rd1: float | None = None) -> np.ndarray:
    """Replace coordinate ``d1`` by a random convex combination of coordinates ``d1`` and ``d2``."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise InvalidArgumentError("vertical crossover needs at least two dimensions")
    if d1 == d2 or not (0 <= d1 < x.size and 0 <= d2 < x.size):
        raise InvalidArgumentError(f"need two distinct dimensions in [0, {x.size}), got {d1}, {d2}")
    if rd1 is None:
        rd1 = rng.random()
    child = x.copy()
    child[d1] = rd1 * x[d1] + (1.0 - rd1) * x[d2]
    return child if bounds is None else bound_repair(child, x, bounds)


@dataclass
class RestartResult:
    replaced: list[int] = field(default_factory=list)
    vol: float = math.inf

    @property
    def evaluations(self) -> int:
        return len(self.replaced)


def apply_restart(pop: Population, tracker: StagnationTracker, bounds: Bounds,
                  rng: np.random.Generator, evaluate: Callable[[np.ndarray], float],
                  archive: Archive | None = None, budget: int | None = None) -> RestartResult:
    """Overwrite stagnant individuals in place.

    Replacement is unconditional. The best member is never touched, the
    displaced vector goes to the archive, and at most ``budget`` new
    evaluations are spent.
    """
    vol = volume_metric(pop.X, bounds)
    tracker.vol = vol
    result = RestartResult(vol=vol)
    if vol >= tracker.vol_threshold:
        return result
    best = pop.best_index()
    stagnant = np.flatnonzero(tracker.counters > tracker.count_threshold)
    dim = pop.dim
    for i in stagnant:
        if i == best:
            continue
        if budget is not None and len(result.replaced) >= budget:
            break
        x = pop.X[i].copy()
        if rng.random() > 0.5 or dim < 2:
            j = int(rng.integers(pop.size - 1))
            j += j >= i
            child = horizontal_crossover(x, pop.X[j], rng, bounds)
        else:
            d1, d2 = rng.choice(dim, 2, replace=False)
            child = vertical_crossover(x, int(d1), int(d2), rng, bounds)
        f_child = evaluate(child)
        if archive is not None:
            archive.add(x)
        pop.X[i] = child
        pop.fitness[i] = f_child
        tracker.counters[i] = 0
        result.replaced.append(int(i))
    return result
