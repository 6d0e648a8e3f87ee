"""Independent reference implementations used only by the tests."""

import itertools


def avg_ranks(values):
    # rank = (# strictly smaller) + (# equal + 1) / 2
    return [sum(w < v for w in values) + (sum(w == v for w in values) + 1) / 2 for v in values]


def brute_force_wilcoxon(diffs):
    """(W+, two-sided p) by enumerating every sign assignment of the nonzero |differences|."""
    d = [x for x in diffs if x != 0]
    ranks = avg_ranks([abs(x) for x in d])
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    le = ge = 0
    total = 0
    for signs in itertools.product((0, 1), repeat=len(d)):
        w = sum(r for r, s in zip(ranks, signs) if s)
        le += w <= w_obs + 1e-9
        ge += w >= w_obs - 1e-9
        total += 1
    return w_obs, min(1.0, 2 * min(le, ge) / total)
