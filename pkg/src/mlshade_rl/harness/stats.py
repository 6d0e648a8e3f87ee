"""Result-table statistics and the paired Wilcoxon signed-rank test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import InvalidArgumentError

EXACT_MAX_N = 25
MIN_NONZERO = 5


class Summary(NamedTuple):
    best: float
    worst: float
    median: float
    mean: float
    std: float


def summarize(errors) -> Summary:
    """Best, worst, median, mean and sample std (0 for a single value)."""
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        raise InvalidArgumentError("cannot summarize an empty list")
    # sorting first makes mean/std independent of input order bit for bit
    e = np.sort(e)
    std = float(np.std(e, ddof=1)) if e.size > 1 else 0.0
    return Summary(float(e[0]), float(e[-1]), float(np.median(e)), float(np.mean(e)), std)


@dataclass(frozen=True)
class WilcoxonResult:
    verdict: str  # "better" | "similar" | "worse", from a's point of view (lower is better)
    statistic: float  # W+ (sum of ranks of positive differences a - b)
    p_value: float
    n: int  # nonzero differences used
    exact: bool
    insufficient: bool = False


def _ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided p from the exact null distribution of W+ over all 2^n sign patterns.

    Ranks are doubled so tied (half-integer) ranks become integers; the
    distribution is then built by a subset-sum count.
    """
    r2 = np.rint(2.0 * ranks).astype(np.int64)
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts += shifted
    counts /= 2.0 ** ranks.size
    w2 = int(round(2.0 * w_plus))
    lower = counts[: w2 + 1].sum()
    upper = counts[w2:].sum()
    return float(min(1.0, 2.0 * min(lower, upper)))


def _normal_p(ranks: np.ndarray, w_plus: float) -> float:
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    if var <= 0.0:
        return 1.0
    z = (abs(w_plus - mean) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    return float(min(1.0, math.erfc(z / math.sqrt(2.0))))


def wilcoxon_signed_rank(a, b, alpha: float = 0.05) -> WilcoxonResult:
    """Paired two-sided test of ``a`` against ``b``.

    Zero differences are dropped. Exact for up to 25 nonzero pairs, normal
    approximation with tie and continuity correction above that. With fewer
    than 5 nonzero pairs the verdict is "similar" and ``insufficient`` is set.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != b.size:
        raise InvalidArgumentError(f"paired samples differ in length: {a.size} vs {b.size}")
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n < MIN_NONZERO:
        return WilcoxonResult("similar", 0.0, 1.0, n, True, insufficient=True)
    ranks = _ranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    exact = n <= EXACT_MAX_N
    p = _exact_p(ranks, w_plus) if exact else _normal_p(ranks, w_plus)
    verdict = "similar"
    if p < alpha:
        med = float(np.median(d))
        if med < 0:
            verdict = "better"
        elif med > 0:
            verdict = "worse"
        else:
            # median difference exactly zero: fall back to the rank-sum direction
            verdict = "better" if w_plus < n * (n + 1) / 4.0 else "worse"
    return WilcoxonResult(verdict, w_plus, p, n, exact)


def tally(verdicts) -> dict[str, int]:
    out = {"better": 0, "similar": 0, "worse": 0}
    for v in verdicts:
        out[v] += 1
    return out
