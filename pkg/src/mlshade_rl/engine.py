"""Core differential-evolution machinery.

Population storage, the external archive, the three mutation strategies,
the weighted scaling factor, binomial crossover, greedy selection, and
midpoint bound repair. The ``*_many`` variants operate on a whole
generation at once; the single-vector functions are thin wrappers so both
paths share one implementation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._util import round_half_up
from .errors import DegenerateInputError, InvalidArgumentError
from .problem import Bounds

MIN_POPULATION = 4


class StrategyKind(enum.IntEnum):
    MS1 = 0  # current-to-pbest-weight/1 with archive
    MS2 = 1  # current-to-pbest/1 without archive
    MS3 = 2  # current-to-ordpbest-weight/1


@dataclass
class Individual:
    x: np.ndarray
    fitness: float


@dataclass
class Population:
    """Decision vectors ``X`` (one per row) and their cached fitness values."""

    X: np.ndarray
    fitness: np.ndarray
    generation: int = 0

    def __post_init__(self):
        self.X = np.array(self.X, dtype=float, ndmin=2)
        self.fitness = np.array(self.fitness, dtype=float, ndmin=1)
        if self.X.shape[0] != self.fitness.shape[0]:
            raise InvalidArgumentError(
                f"{self.X.shape[0]} vectors but {self.fitness.shape[0]} fitness values"
            )

    @property
    def size(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.size

    def __getitem__(self, i) -> Individual:
        return Individual(self.X[i].copy(), float(self.fitness[i]))

    def best_index(self) -> int:
        return int(np.argmin(self.fitness))

    def best(self) -> Individual:
        return self[self.best_index()]

    def sort(self) -> np.ndarray:
        """Sort ascending by fitness (stable); returns the permutation applied."""
        order = np.argsort(self.fitness, kind="stable")
        self.X = self.X[order]
        self.fitness = self.fitness[order]
        return order

    def keep(self, indices) -> None:
        self.X = self.X[indices]
        self.fitness = self.fitness[indices]


class Archive:
    """Bounded pool of replaced parent vectors.

    Inserting into a full archive overwrites a uniformly random member;
    shrinking the capacity evicts a uniformly random subset.
    """

    def __init__(self, dim: int, capacity: int, rng: np.random.Generator):
        if capacity < 0:
            raise InvalidArgumentError(f"archive capacity must be >= 0, got {capacity}")
        self._data = np.empty((max(capacity, 1), dim))
        self._size = 0
        self.capacity = int(capacity)
        self.rng = rng

    @classmethod
    def from_population(cls, pop: Population, capacity: int, rng: np.random.Generator) -> "Archive":
        archive = cls(pop.dim, capacity, rng)
        archive.add_many(pop.X)
        return archive

    def __len__(self):
        return self._size

    @property
    def members(self) -> np.ndarray:
        return self._data[: self._size]

    def add(self, x) -> None:
        if self.capacity == 0:
            return
        if self._size < self.capacity:
            self._data[self._size] = x
            self._size += 1
        else:
            self._data[self.rng.integers(self._size)] = x

    def add_many(self, xs) -> None:
        for x in np.asarray(xs, dtype=float).reshape(-1, self._data.shape[1]):
            self.add(x)

    def resize(self, capacity: int) -> None:
        capacity = int(capacity)
        if capacity > self._data.shape[0]:
            grown = np.empty((capacity, self._data.shape[1]))
            grown[: self._size] = self.members
            self._data = grown
        if self._size > capacity:
            keep = np.sort(self.rng.choice(self._size, capacity, replace=False))
            self._data[:capacity] = self._data[keep]
            self._size = capacity
        self.capacity = capacity


def initialize_population(bounds: Bounds, n: int, rng: np.random.Generator,
                          evaluate: Callable[[np.ndarray], float]) -> Population:
    """Uniform random population inside ``bounds``, fully evaluated."""
    if n < MIN_POPULATION:
        raise InvalidArgumentError(f"population size must be >= {MIN_POPULATION}, got {n}")
    X = bounds.lower + bounds.width * rng.random((n, bounds.dim))
    fitness = np.array([evaluate(x) for x in X])
    return Population(X, fitness)


def weighted_f(F, nfes: int, nfes_max: int):
    """Stage-dependent multiplier applied to F in the pbest-weight terms."""
    if nfes <= 0.2 * nfes_max:
        w = 0.7
    elif nfes <= 0.4 * nfes_max:
        w = 0.8
    else:
        w = 1.2
    return w * F


def bound_repair(v, target, bounds: Bounds) -> np.ndarray:
    """Move each violated coordinate halfway between the bound and the target."""
    v = np.array(v, dtype=float)
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(bounds.lower, v.shape)
    hi = np.broadcast_to(bounds.upper, v.shape)
    t = np.broadcast_to(target, v.shape)
    below = v < lo
    above = v > hi
    v[below] = 0.5 * (lo[below] + t[below])
    v[above] = 0.5 * (hi[above] + t[above])
    return v


def mutant_from_donors(kinds, x, a, b, c, F, Fw) -> np.ndarray:
    """Combine targets with their three donors, unrepaired.

    Donor roles per strategy: MS1 (pbest, r1, r2), MS2 (pbest, r1, r3),
    MS3 (ordpbest, ordm, ordw). Arrays may be single vectors or stacked rows.
    """
    kinds = np.asarray(kinds)
    x, a, b, c = (np.asarray(v, dtype=float) for v in (x, a, b, c))
    F = np.asarray(F, dtype=float)[..., None]
    Fw = np.asarray(Fw, dtype=float)[..., None]
    kk = kinds[..., None]
    ms1 = x + Fw * (a - x) + F * (b - c)
    ms2 = x + F * (a - x + b - c)
    ms3 = x + Fw * (a - x + b - c)
    return np.where(kk == StrategyKind.MS1, ms1, np.where(kk == StrategyKind.MS2, ms2, ms3))


def _draw_excluding(rng, high: int, exclude: list[np.ndarray], n: int) -> np.ndarray:
    """Uniform integers in [0, high) differing elementwise from every array in ``exclude``."""
    out = rng.integers(high, size=n)
    bad = np.zeros(n, dtype=bool)
    for e in exclude:
        bad |= out == e
    while np.any(bad):
        idx = np.flatnonzero(bad)
        out[idx] = rng.integers(high, size=idx.size)
        bad[:] = False
        for e in exclude:
            bad[idx] = bad[idx] | (out[idx] == e[idx])
    return out


def pbest_count(n: int, p: float) -> int:
    return min(n, max(2, round_half_up(n * p)))


def mutate_many(kinds, targets, pop: Population, archive: Archive | None, F, Fw, p: float,
                rng: np.random.Generator, bounds: Bounds) -> np.ndarray:
    """Mutant vectors for the population members indexed by ``targets``.

    ``pop`` must be sorted ascending by fitness so its head is the pbest pool.
    """
    N = pop.size
    if N < MIN_POPULATION:
        raise DegenerateInputError(f"mutation needs at least {MIN_POPULATION} individuals, got {N}")
    kinds = np.asarray(kinds, dtype=int)
    targets = np.asarray(targets, dtype=int)
    n = targets.size
    F = np.broadcast_to(np.asarray(F, dtype=float), (n,))
    Fw = np.broadcast_to(np.asarray(Fw, dtype=float), (n,))
    X = pop.X
    arch = archive.members if archive is not None else np.empty((0, pop.dim))
    union = np.vstack([X, arch]) if len(arch) else X

    pbest = rng.integers(pbest_count(N, p), size=n)
    r1 = _draw_excluding(rng, N, [targets], n)
    r2 = _draw_excluding(rng, union.shape[0], [targets, r1], n)
    r3 = _draw_excluding(rng, N, [targets, r1], n)
    # MS3 donors: pbest plus two others, ranked by fitness
    o2 = _draw_excluding(rng, N, [targets, pbest], n)
    o3 = _draw_excluding(rng, N, [targets, pbest, o2], n)
    trio = np.stack([pbest, o2, o3], axis=1)
    rank = np.argsort(pop.fitness[trio], axis=1, kind="stable")
    trio = np.take_along_axis(trio, rank, axis=1)

    ms3 = kinds == StrategyKind.MS3
    ms1 = kinds == StrategyKind.MS1
    a = np.where(ms3, trio[:, 0], pbest)
    b = np.where(ms3, trio[:, 1], r1)
    c_rows = np.where(ms1[:, None], union[r2], X[np.where(ms3, trio[:, 2], r3)])

    x = X[targets]
    v = mutant_from_donors(kinds, x, X[a], X[b], c_rows, F, Fw)
    return bound_repair(v, x, bounds)


def mutate(kind: StrategyKind, i: int, pop: Population, archive: Archive | None, F: float,
           F_w: float, p: float, rng: np.random.Generator, bounds: Bounds) -> np.ndarray:
    """Mutant vector for member ``i`` under strategy ``kind``."""
    return mutate_many([kind], [i], pop, archive, [F], [F_w], p, rng, bounds)[0]


def crossover_mask(n: int, dim: int, CR, rng: np.random.Generator) -> np.ndarray:
    """Binomial inheritance mask: True takes the mutant coordinate.

    Draws uniforms first, then one forced index per row; callers that share
    this helper consume the random stream identically.
    """
    CR = np.broadcast_to(np.asarray(CR, dtype=float), (n,))
    mask = rng.random((n, dim)) < CR[:, None]
    jrand = rng.integers(dim, size=n)
    mask[np.arange(n), jrand] = True
    return mask


def binomial_crossover_many(targets, mutants, CR, rng: np.random.Generator) -> np.ndarray:
    targets = np.asarray(targets, dtype=float)
    mutants = np.asarray(mutants, dtype=float)
    if targets.shape != mutants.shape:
        raise InvalidArgumentError(f"shape mismatch {targets.shape} vs {mutants.shape}")
    mask = crossover_mask(targets.shape[0], targets.shape[1], CR, rng)
    return np.where(mask, mutants, targets)


def binomial_crossover(target, mutant, CR: float, rng: np.random.Generator) -> np.ndarray:
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    if target.shape != mutant.shape or target.ndim != 1:
        raise InvalidArgumentError(f"shape mismatch {target.shape} vs {mutant.shape}")
    return binomial_crossover_many(target[None], mutant[None], [CR], rng)[0]


def select(target: Individual, trial: Individual, archive: Archive | None = None):
    """Greedy one-to-one survivor selection.

    The trial wins only on strictly lower fitness, in which case the
    displaced target vector goes to the archive.
    """
    if trial.fitness < target.fitness:
        if archive is not None:
            archive.add(target.x)
        return trial, True
    return target, False
