"""Covariance matrix learning crossover on a Euclidean neighborhood.

The neighborhood is the ``P_s`` fraction of the population closest to the
current best. Binomial crossover is carried out in the eigenbasis of the
neighborhood covariance and the trial rotated back. Any numerical failure
degrades to ordinary binomial crossover.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._util import round_half_up
from .engine import Population, bound_repair, crossover_mask
from .errors import DegenerateInputError, InvalidArgumentError, NumericalError
from .linalg import covariance, eigen_symmetric
from .problem import Bounds

log = logging.getLogger(__name__)

CML = "cml"
BINOMIAL = "binomial"


@dataclass(frozen=True)
class CmlConfig:
    P_c: float = 0.4
    P_s: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.P_c <= 1.0:
            raise InvalidArgumentError(f"P_c must lie in [0, 1], got {self.P_c}")
        if not 0.0 < self.P_s <= 1.0:
            raise InvalidArgumentError(f"P_s must lie in (0, 1], got {self.P_s}")


def neighborhood(pop: Population, cfg: CmlConfig) -> np.ndarray:
    """Indices of the ``max(2, round(N * P_s))`` members nearest the best.

    Distance ties go to the lower population index.
    """
    n = pop.size
    k = min(n, max(2, round_half_up(n * cfg.P_s)))
    best = pop.X[pop.best_index()]
    dist = np.linalg.norm(pop.X - best, axis=1)
    order = np.lexsort((np.arange(n), dist))
    return order[:k]


def eigenbasis(pop: Population, cfg: CmlConfig) -> np.ndarray | None:
    """Orthonormal eigenvectors of the neighborhood covariance, or None on failure."""
    try:
        c = covariance(pop.X[neighborhood(pop, cfg)])
        return eigen_symmetric(c).eigenvectors
    except (DegenerateInputError, NumericalError, InvalidArgumentError) as exc:
        log.debug("eigenbasis unavailable, falling back to binomial crossover: %s", exc)
        return None


def choose_crossover(cfg: CmlConfig, rng: np.random.Generator, n: int | None = None):
    """Pick CML with probability ``P_c``.

    With ``n`` given, returns a boolean array (True = CML) for ``n`` trials.
    """
    if n is None:
        return CML if rng.random() < cfg.P_c else BINOMIAL
    return rng.random(n) < cfg.P_c


def crossover_many(targets, mutants, CR, use_cml, basis: np.ndarray | None,
                   rng: np.random.Generator, bounds: Bounds | None = None) -> np.ndarray:
    """Trial vectors for a batch; rows flagged ``use_cml`` cross in the rotated frame.

    Without a basis every row uses plain binomial crossover. The inheritance
    mask is drawn the same way in both cases.
    """
    targets = np.asarray(targets, dtype=float)
    mutants = np.asarray(mutants, dtype=float)
    n, dim = targets.shape
    mask = crossover_mask(n, dim, CR, rng)
    trials = np.where(mask, mutants, targets)
    use_cml = np.broadcast_to(np.asarray(use_cml, dtype=bool), (n,))
    if basis is None or not np.any(use_cml):
        return trials
    rows = np.flatnonzero(use_cml)
    # row-vector form of O^T x and O u'
    t_rot = targets[rows] @ basis
    m_rot = mutants[rows] @ basis
    rotated = np.where(mask[rows], m_rot, t_rot) @ basis.T
    if bounds is not None:
        rotated = bound_repair(rotated, targets[rows], bounds)
    trials[rows] = rotated
    return trials


def cml_crossover(target, mutant, pop: Population, CR: float, cfg: CmlConfig,
                  rng: np.random.Generator, bounds: Bounds | None = None,
                  basis: np.ndarray | None = None) -> np.ndarray:
    """Single-trial CML crossover.

    ``basis`` may be injected (e.g. cached per generation); otherwise it is
    computed from ``pop``.
    """
    if basis is None:
        basis = eigenbasis(pop, cfg)
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    return crossover_many(target[None], mutant[None], [CR], [True], basis, rng, bounds)[0]
