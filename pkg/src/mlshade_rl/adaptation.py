"""Parameter and operator self-adaptation.

Covers the success-history memories for F, CR and the sinusoid frequency,
the two-sinusoid F ensemble and its success-rate selector, mutation
strategy probabilities driven by fitness improvement rates, and the linear
population size schedule.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._util import round_half_up
from .engine import StrategyKind
from .errors import InvalidArgumentError

SCALE = 0.1  # spread of the Cauchy/normal parameter samplers
PROB_MIN, PROB_MAX = 0.1, 0.9


class FSource(enum.IntEnum):
    """Which rule produced an individual's F."""

    SIN_DECREASING = 0  # fixed frequency, shrinking amplitude
    SIN_ADAPTIVE = 1  # history-based frequency, growing amplitude
    CAUCHY = 2


@dataclass
class ParameterMemory:
    size: int = 5
    initial: float = 0.5
    muF: np.ndarray = field(init=False)
    muCR: np.ndarray = field(init=False)
    muFreq: np.ndarray = field(init=False)
    write_pos: int = 0

    def __post_init__(self):
        if self.size < 1:
            raise InvalidArgumentError(f"memory size must be >= 1, got {self.size}")
        self.muF = np.full(self.size, self.initial)
        self.muCR = np.full(self.size, self.initial)
        self.muFreq = np.full(self.size, self.initial)


@dataclass
class SinusoidSelector:
    """Success-rate based choice between the two sinusoidal F rules."""

    learning_period: int = 20
    epsilon: float = 0.01
    probs: np.ndarray = field(default_factory=lambda: np.array([0.5, 0.5]))
    window: deque = field(init=False)

    def __post_init__(self):
        self.window = deque(maxlen=self.learning_period)

    def record(self, successes, failures) -> None:
        """Push one generation's (success, failure) counts for both rules."""
        self.window.append((np.asarray(successes, dtype=float), np.asarray(failures, dtype=float)))


@dataclass
class StrategyState:
    probs: np.ndarray = field(default_factory=lambda: np.full(3, 1.0 / 3.0))
    improvements: np.ndarray = field(default_factory=lambda: np.zeros(3))
    assignments: np.ndarray | None = None
    adaptive: bool = True


def sinusoid_decreasing(G, G_max, freq):
    return 0.5 * (np.sin(np.pi * (2.0 * freq * G + 1.0)) * (G_max - G) / G_max + 1.0)


def sinusoid_increasing(G, G_max, freq):
    return 0.5 * (np.sin(np.pi * (2.0 * freq * G + 1.0)) * G / G_max + 1.0)


def _cauchy_positive(loc, rng, truncate=True):
    """Cauchy(loc, 0.1) resampled while <= 0, optionally truncated to 1."""
    loc = np.asarray(loc, dtype=float)
    out = loc + SCALE * rng.standard_cauchy(loc.shape)
    bad = out <= 0.0
    while np.any(bad):
        out[bad] = loc[bad] + SCALE * rng.standard_cauchy(int(bad.sum()))
        bad = out <= 0.0
    if truncate:
        out = np.minimum(out, 1.0)
    return out


def sample_F(mem: ParameterMemory, sel: SinusoidSelector, G: int, G_max: float, f_q: float,
             rng: np.random.Generator, n: int = 1, r=None):
    """Draw ``n`` scaling factors.

    Returns ``(F, source, freq)`` arrays; ``freq`` holds the adaptive
    sinusoid's frequency where ``source == SIN_ADAPTIVE`` and NaN elsewhere.
    ``r`` are memory slots, drawn uniformly when omitted.
    """
    if r is None:
        r = rng.integers(mem.size, size=n)
    r = np.asarray(r)
    freq = np.full(n, np.nan)
    if G <= G_max / 2:
        first = rng.random(n) < sel.probs[0]
        source = np.where(first, FSource.SIN_DECREASING, FSource.SIN_ADAPTIVE).astype(int)
        F = np.empty(n)
        F[first] = sinusoid_decreasing(G, G_max, f_q)
        second = ~first
        if np.any(second):
            fq1 = _cauchy_positive(mem.muFreq[r[second]], rng)
            freq[second] = fq1
            F[second] = sinusoid_increasing(G, G_max, fq1)
    else:
        source = np.full(n, FSource.CAUCHY, dtype=int)
        F = _cauchy_positive(mem.muF[r], rng)
    return F, source, freq


def sample_CR(mem: ParameterMemory, rng: np.random.Generator, n: int = 1, r=None) -> np.ndarray:
    """Normal(muCR_r, 0.1) clipped to [0, 1]."""
    if r is None:
        r = rng.integers(mem.size, size=n)
    return np.clip(rng.normal(mem.muCR[np.asarray(r)], SCALE), 0.0, 1.0)


def update_sinusoid_selector(sel: SinusoidSelector, G: int) -> np.ndarray:
    """Recompute rule probabilities from the last ``learning_period`` generations."""
    if G <= sel.learning_period or not sel.window:
        sel.probs = np.array([0.5, 0.5])
        return sel.probs
    ns = sum(s for s, _ in sel.window)
    nf = sum(f for _, f in sel.window)
    total = ns + nf
    rate = np.divide(ns, total, out=np.zeros(2), where=total > 0)
    s = rate + sel.epsilon
    sel.probs = s / s.sum()
    return sel.probs


def weighted_lehmer_mean(values, deltas) -> float:
    """sum(w * s^2) / sum(w * s) with weights proportional to ``deltas``."""
    values = np.asarray(values, dtype=float)
    w = np.asarray(deltas, dtype=float)
    w = w / w.sum()
    den = float(np.dot(w, values))
    if den == 0.0:
        return 0.0
    return float(np.dot(w, values * values)) / den


def update_memories(mem: ParameterMemory, S_F, S_CR, S_freq, deltas, freq_deltas=None) -> bool:
    """Write this generation's weighted Lehmer means into the memories.

    ``freq_deltas`` weights ``S_freq`` (only the adaptive-sinusoid successes
    carry a frequency). Returns True if anything was written, in which case
    the shared write position advances.
    """
    S_F, S_CR, deltas = (np.asarray(a, dtype=float) for a in (S_F, S_CR, deltas))
    S_freq = np.asarray(S_freq, dtype=float)
    if freq_deltas is None:
        freq_deltas = deltas if S_freq.size else np.empty(0)
    freq_deltas = np.asarray(freq_deltas, dtype=float)
    if not (S_F.size == S_CR.size == deltas.size) or S_freq.size != freq_deltas.size:
        raise InvalidArgumentError("success lists and improvement lists must have equal lengths")
    k = mem.write_pos
    written = False
    if S_F.size:
        mem.muF[k] = weighted_lehmer_mean(S_F, deltas)
        written = True
    if S_CR.size:
        mem.muCR[k] = weighted_lehmer_mean(S_CR, deltas)
        written = True
    if S_freq.size:
        mem.muFreq[k] = weighted_lehmer_mean(S_freq, freq_deltas)
        written = True
    if written:
        mem.write_pos = (k + 1) % mem.size
    return written


def assign_strategies(state: StrategyState, n: int, rng: np.random.Generator) -> np.ndarray:
    """One mutation strategy per individual by cumulative thresholds on the probabilities."""
    q = np.asarray(state.probs, dtype=float)
    q = q / q.sum()
    u = rng.random(n)
    kinds = np.where(u < q[0], StrategyKind.MS1,
                     np.where(u < q[0] + q[1], StrategyKind.MS2, StrategyKind.MS3)).astype(int)
    state.assignments = kinds
    return kinds


def update_strategy_probs(state: StrategyState, old_fitness, new_fitness, assignments) -> np.ndarray:
    """Probabilities proportional to each strategy's relative improvement, clamped to [0.1, 0.9].

    Improvement is ``max(0, f_old - f_new)`` per individual, divided by the
    summed magnitude of that strategy's old fitness values.
    """
    old = np.asarray(old_fitness, dtype=float)
    new = np.asarray(new_fitness, dtype=float)
    kinds = np.asarray(assignments)
    gain = np.maximum(0.0, old - new)
    rates = np.zeros(3)
    for k in range(3):
        mine = kinds == k
        denom = float(np.abs(old[mine]).sum())
        if denom > 0.0:
            rates[k] = float(gain[mine].sum()) / denom
    if not np.all(np.isfinite(rates)):
        # a vanishing denominator overflowed; such strategies share the credit
        rates = np.isinf(rates).astype(float)
    state.improvements = rates
    total = rates.sum()
    if total <= 0.0:
        state.probs = np.full(3, 1.0 / 3.0)
    else:
        state.probs = np.clip(rates / total, PROB_MIN, PROB_MAX)
    return state.probs


def lpsr(N_init: int, N_min: int, nfes: int, nfes_max: int) -> int:
    """Linear population size schedule from ``N_init`` down to ``N_min``."""
    if N_min > N_init:
        raise InvalidArgumentError(f"N_min ({N_min}) exceeds N_init ({N_init})")
    frac = min(max(nfes, 0), nfes_max) / nfes_max
    return round_half_up(N_init + (N_min - N_init) * frac)
