import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlshade_rl.engine import Archive, Population
from mlshade_rl.errors import InvalidArgumentError
from mlshade_rl.problem import Bounds, builtin
from mlshade_rl.restart import (
    StagnationTracker,
    apply_restart,
    horizontal_combination,
    horizontal_crossover,
    record_counters,
    vertical_crossover,
    volume_metric,
)


class CountingObjective:
    def __init__(self, prob):
        self.prob = prob
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.prob(x)


def stagnant_setup(n=10, d=10, spread=1e-3, seed=0):
    rng = np.random.default_rng(seed)
    prob = builtin("sphere", d)
    X = 5.0 + spread * rng.random((n, d))
    pop = Population(X, [prob(x) for x in X])
    pop.sort()
    tracker = StagnationTracker.create(n, d)
    return pop, tracker, prob, rng


def test_counters():
    tr = StagnationTracker.create(3, 2)
    record_counters(tr, [2.0, 1.0, 1.0], [1.0, 2.0, 1.0])
    assert list(tr.counters) == [1, 0, 0]
    record_counters(tr, [2.0, 3.0, 1.0], [1.0, 2.0, 1.0])
    assert list(tr.counters) == [2, 1, 0]


def test_volume_identical_is_zero():
    assert volume_metric(np.ones((5, 3)), Bounds.box(3)) == 0.0


def test_volume_hand_value():
    vol = volume_metric(np.array([[-100.0], [100.0]]), Bounds.box(1))
    oracle = math.sqrt(math.sqrt(200 / 2) / math.sqrt(200))
    assert vol == pytest.approx(oracle, rel=1e-14)
    assert vol == pytest.approx(0.8409, abs=1e-4)


def test_volume_no_overflow_high_dim():
    X = np.random.default_rng(0).uniform(-100, 100, (50, 200))
    assert 0.0 < volume_metric(X, Bounds.box(200)) < 1e-3


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(0, 1000))
def test_volume_monotone_in_spread(shrink, seed):
    X = np.random.default_rng(seed).uniform(-10, 10, (8, 3))
    c = X.mean(axis=0)
    assert volume_metric(c + shrink * (X - c), Bounds.box(3)) < volume_metric(X, Bounds.box(3))


def test_horizontal_degenerate_weights():
    x1, x2 = np.array([1.0, 2.0]), np.array([-3.0, 4.0])
    assert np.array_equal(horizontal_combination(x1, x2, 1.0, 0.0), x1)
    assert np.array_equal(horizontal_combination(x1, x2, 0.0, 0.0), x2)
    for seed in range(5):
        assert np.allclose(horizontal_crossover(x1, x1.copy(), np.random.default_rng(seed)), x1)


def test_vertical_cases():
    x = np.array([0.0, 10.0])
    assert np.array_equal(vertical_crossover(x, 0, 1, rd1=1.0), x)
    assert np.allclose(vertical_crossover(x, 0, 1, rd1=0.3), [7.0, 10.0])
    y = np.array([4.0, 4.0, 1.0])
    assert np.array_equal(vertical_crossover(y, 0, 1, np.random.default_rng(0)), y)
    with pytest.raises(InvalidArgumentError):
        vertical_crossover(x, 1, 1, rd1=0.5)
    with pytest.raises(InvalidArgumentError):
        vertical_crossover(np.array([1.0]), 0, 0, rd1=0.5)


def test_restart_replaces_all_stagnant_but_best():
    pop, tr, prob, rng = stagnant_setup()
    tr.counters[:] = 2 * pop.dim + 1
    f = CountingObjective(prob)
    arch = Archive(pop.dim, 50, rng)
    before = pop.X.copy()
    res = apply_restart(pop, tr, prob.bounds, rng, f, arch)
    assert res.vol < 1e-3
    assert sorted(res.replaced) == list(range(1, pop.size))
    assert f.calls == pop.size - 1 and len(arch) == pop.size - 1
    assert np.array_equal(pop.X[0], before[0])
    assert np.all(tr.counters[1:] == 0)
    assert np.allclose(pop.fitness, [prob(x) for x in pop.X])


def test_restart_needs_low_volume():
    rng = np.random.default_rng(1)
    prob = builtin("sphere", 2)
    X = rng.uniform(-100, 100, (10, 2))
    pop = Population(X, [prob(x) for x in X])
    tr = StagnationTracker.create(10, 2)
    tr.counters[:] = 100
    before = pop.X.copy()
    res = apply_restart(pop, tr, prob.bounds, rng, prob)
    assert res.vol >= 1e-3 and not res.replaced
    assert np.array_equal(pop.X, before)


def test_restart_counter_at_threshold_untouched():
    pop, tr, prob, rng = stagnant_setup()
    tr.counters[:] = 2 * pop.dim
    before = pop.X.copy()
    assert not apply_restart(pop, tr, prob.bounds, rng, prob).replaced
    assert np.array_equal(pop.X, before)


def test_restart_single_stagnant_one_evaluation():
    pop, tr, prob, rng = stagnant_setup()
    tr.counters[4] = 2 * pop.dim + 1
    f = CountingObjective(prob)
    res = apply_restart(pop, tr, prob.bounds, rng, f)
    assert res.replaced == [4] and f.calls == 1


def test_restart_respects_budget():
    pop, tr, prob, rng = stagnant_setup()
    tr.counters[:] = 100
    f = CountingObjective(prob)
    res = apply_restart(pop, tr, prob.bounds, rng, f, budget=3)
    assert res.evaluations == 3 == f.calls


def test_restart_children_feasible():
    prob = builtin("sphere", 4)
    X = np.full((6, 4), 99.9999) + 1e-5 * np.random.default_rng(0).random((6, 4))
    pop = Population(X, [prob(x) for x in X])
    tr = StagnationTracker.create(6, 4)
    tr.counters[:] = 100
    for seed in range(10):
        apply_restart(pop, tr, prob.bounds, np.random.default_rng(seed), prob)
        assert np.all(np.abs(pop.X) <= 100.0)
        tr.counters[:] = 100
