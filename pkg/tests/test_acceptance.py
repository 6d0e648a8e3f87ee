"""Acceptance criteria, each checked at its stated tolerance.

A PASS/FAIL line per criterion is printed in the terminal summary.
Full-budget runs dominate the wall time (several minutes on one core).
"""

import numpy as np
import pytest

from mlshade_rl.adaptation import lpsr
from mlshade_rl.engine import Population, weighted_f
from mlshade_rl.harness.cli import main as cli_main
from mlshade_rl.harness.stats import wilcoxon_signed_rank
from mlshade_rl.linalg import SymmetricMatrix, eigen_symmetric
from mlshade_rl.local_search import bounded_quasi_newton
from mlshade_rl.optimizer import RunConfig, run, run_many
from mlshade_rl.problem import BUILTIN_NAMES, Bounds, ObjectiveFunction, builtin
from mlshade_rl.restart import StagnationTracker, apply_restart

from .oracles import brute_force_wilcoxon

D = 10
BUDGET = 100_000
RUNS = 25


@pytest.fixture(scope="module")
def instrumented_runs():
    """Full-budget runs on three problems x five seeds with per-generation snapshots."""
    out = {}
    for name in ("sphere", "rastrigin", "rosenbrock"):
        for seed in range(5):
            log = []
            rec = run(builtin(name, D), RunConfig(D=D, nfes_max=BUDGET, seed=seed),
                      callback=lambda g, log=log: log.append(
                          (g.lpsr_nfes, g.pop_size, g.strategy_probs.copy())))
            out[name, seed] = (rec, log)
    return out


@pytest.mark.parametrize("name", ["sphere", "ellipsoid"])
def test_01_unimodal_convergence(name, acceptance_report):
    recs = run_many(builtin(name, D), RunConfig(D=D, nfes_max=BUDGET), RUNS, base_seed=0)
    errors = np.array([r.error for r in recs])
    ok = len(recs) == RUNS and np.all(errors == 0.0)
    acceptance_report(f"1 unimodal convergence ({name})", ok,
                      f"{int(np.sum(errors == 0.0))}/{RUNS} runs at error 0, worst {errors.max():.2E}")
    assert ok


def test_02_multimodal_competence(acceptance_report):
    recs = run_many(builtin("rastrigin", D), RunConfig(D=D, nfes_max=BUDGET), RUNS, base_seed=0)
    errors = np.array([r.error for r in recs])
    med = float(np.median(errors))
    ok = med <= 5.0
    acceptance_report("2 multimodal competence (rastrigin)", ok,
                      f"median error {med:.4g} (threshold 5), mean {errors.mean():.4g}")
    assert ok


def test_03_lpsr_schedule(instrumented_runs, acceptance_report):
    n_init = 18 * D
    ok = lpsr(n_init, 4, 0, BUDGET) == n_init and lpsr(n_init, 4, BUDGET, BUDGET) == 4
    detail = []
    for key, (rec, log) in instrumented_runs.items():
        sizes = [n_init] + [size for _, size, _ in log]
        on_schedule = all(size == lpsr(n_init, 4, nfes, BUDGET) for nfes, size, _ in log)
        monotone = all(b <= a for a, b in zip(sizes, sizes[1:]))
        ok &= on_schedule and monotone and sizes[-1] == 4 and rec.final_pop_size == 4
    detail.append(f"N(0)={lpsr(n_init, 4, 0, BUDGET)}, N(max)={lpsr(n_init, 4, BUDGET, BUDGET)}, "
                  f"{len(instrumented_runs)} instrumented runs on schedule and monotone")
    acceptance_report("3 LPSR schedule", ok, "; ".join(detail))
    assert ok


def test_04_weighted_f(acceptance_report):
    cases = [(0, 0.7), (20_000, 0.7), (20_001, 0.8), (40_000, 0.8), (40_001, 1.2), (100_000, 1.2)]
    got = [weighted_f(1.0, nfes, BUDGET) for nfes, _ in cases]
    ok = all(g == w for g, (_, w) in zip(got, cases))
    acceptance_report("4 weighted-F schedule", ok,
                      ", ".join(f"nfes={n}->{g}" for (n, _), g in zip(cases, got)))
    assert ok


def test_05_strategy_probability_bounds(instrumented_runs, acceptance_report):
    lo, hi, gens = 1.0, 0.0, 0
    for _, log in instrumented_runs.values():
        for _, _, p in log:
            lo, hi, gens = min(lo, p.min()), max(hi, p.max()), gens + 1
    ok = lo >= 0.1 and hi <= 0.9
    acceptance_report("5 strategy probabilities in [0.1, 0.9]", ok,
                      f"{gens} generations over 5 seeds x 3 problems, range [{lo:.4f}, {hi:.4f}]")
    assert ok


def test_06_eigendecomposition(acceptance_report):
    rng = np.random.default_rng(2024)
    worst_rec = worst_orth = 0.0
    for k in range(100):
        d = (2, 10, 30)[k % 3]
        a = rng.normal(size=(d, d)) * rng.choice([1e-3, 1.0, 1e3])
        c = SymmetricMatrix(a + a.T)
        e = eigen_symmetric(c)
        rec = np.linalg.norm(e.reconstruct() - c.entries) / np.linalg.norm(c.entries)
        orth = np.max(np.abs(e.eigenvectors.T @ e.eigenvectors - np.eye(d)))
        worst_rec, worst_orth = max(worst_rec, rec), max(worst_orth, orth)
    ok = worst_rec <= 1e-9 and worst_orth <= 1e-10
    acceptance_report("6 eigendecomposition", ok,
                      f"worst relative reconstruction {worst_rec:.2E}, worst orthonormality {worst_orth:.2E}")
    assert ok


def test_07_wilcoxon_exact_vs_oracle(acceptance_report):
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(100):
        n = 5 + k % 8  # 5..12
        # integer-valued differences so ties and zeros occur
        d = rng.integers(-6, 7, size=n).astype(float)
        while np.count_nonzero(d) < 5:
            d = rng.integers(-6, 7, size=n).astype(float)
        res = wilcoxon_signed_rank(d, np.zeros(n))
        _, p = brute_force_wilcoxon(list(d))
        worst = max(worst, abs(res.p_value - p))
    ok = worst <= 1e-12
    acceptance_report("7 Wilcoxon exact vs enumeration", ok, f"100 cases n<=12, max |dp| {worst:.2E}")
    assert ok


def test_08_restart_guard(acceptance_report):
    rng = np.random.default_rng(8)
    prob = builtin("sphere", D)
    X = 3.0 + 1e-4 * rng.random((20, D))
    pop = Population(X, [prob(x) for x in X])
    pop.sort()
    tracker = StagnationTracker.create(pop.size, D)
    tracker.counters[:] = 2 * D + 1
    best = pop.X[0].copy()
    res = apply_restart(pop, tracker, prob.bounds, rng, prob)
    low_ok = (res.vol < 1e-3 and sorted(res.replaced) == list(range(1, pop.size))
              and np.array_equal(pop.X[0], best) and np.all(tracker.counters[1:] == 0))

    # a uniform population in a tight box has Vol >= 0.001
    tight = Bounds.box(D, -1.0, 1.0)
    wide_prob = ObjectiveFunction("sphere", prob.func, tight)
    Y = tight.lower + tight.width * rng.random((20, D))
    wide = Population(Y, [wide_prob(y) for y in Y])
    tracker = StagnationTracker.create(wide.size, D)
    tracker.counters[:] = 2 * D + 1
    before = wide.X.copy()
    res2 = apply_restart(wide, tracker, tight, rng, wide_prob)
    high_ok = res2.vol >= 1e-3 and not res2.replaced and np.array_equal(wide.X, before)
    ok = low_ok and high_ok
    acceptance_report("8 restart guard", ok,
                      f"Vol={res.vol:.2E}: {len(res.replaced)}/{pop.size - 1} non-best replaced; "
                      f"Vol={res2.vol:.2E}: {len(res2.replaced)} replaced")
    assert ok


def test_09_quasi_newton(acceptance_report):
    rng = np.random.default_rng(9)
    d = 10
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    A = q @ np.diag(np.logspace(0, 2, d)) @ q.T
    b = rng.uniform(-5, 5, d)
    f = ObjectiveFunction("quad", lambda x: 0.5 * x @ A @ x - b @ x, Bounds.box(d))
    x0 = rng.uniform(-50, 50, d)
    f0 = f(x0)
    res = bounded_quasi_newton(f, x0, 500)
    grad = np.linalg.norm(A @ res.x - b)
    ok = grad < 1e-6 and res.evals <= 500 and res.fun <= f0
    acceptance_report("9 quasi-Newton on 10-D quadratic", ok,
                      f"|grad|={grad:.2E} after {res.evals} evaluations, f {f0:.3g} -> {res.fun:.3g}")
    assert ok


def test_10_determinism(tmp_path, acceptance_report):
    outputs = []
    for k in range(2):
        out = tmp_path / f"rep{k}"
        code = cli_main(["run", "--problem", "sphere,rastrigin,ackley", "--dim", "5", "--runs", "3",
                         "--budget", "8000", "--seed", "11", "--out", str(out), "--trace"])
        assert code == 0
        outputs.append({f: (out / f).read_bytes() for f in ("results.csv", "table.csv", "trace.csv")})
    ok = outputs[0] == outputs[1]
    acceptance_report("10 determinism", ok, "two harness executions, CSV outputs byte-identical"
                      if ok else "CSV outputs differ")
    assert ok


class _Checked:
    """Objective wrapper asserting bound feasibility and counting calls."""

    def __init__(self, prob):
        self.prob = prob
        self.calls = 0
        self.infeasible = 0

    def __call__(self, x):
        self.calls += 1
        if not self.prob.bounds.contains(x):
            self.infeasible += 1
        return self.prob.func(x)


def test_11_fuzzed_invariants(acceptance_report):
    rng = np.random.default_rng(11)
    failures = []
    for k in range(10):
        d = int(rng.integers(2, 9))
        name = BUILTIN_NAMES[int(rng.integers(len(BUILTIN_NAMES)))]
        n_init = int(rng.integers(4, 18 * d + 1))
        cfg = RunConfig(D=d, nfes_max=int(rng.integers(n_init, 3000 * d)), N_init=n_init,
                        N_min=int(rng.integers(4, min(n_init, 8) + 1)), seed=int(rng.integers(1 << 30)),
                        H=int(rng.integers(1, 10)), P_c=float(rng.random()), P_s=float(rng.uniform(0.1, 1)),
                        p=float(rng.uniform(0.05, 0.3)), archive_rate=float(rng.uniform(0, 3)),
                        restart=bool(rng.random() < 0.8), local_search=bool(rng.random() < 0.8),
                        ls_gate=float(rng.uniform(0, 1)), P_LS_init=float(rng.uniform(0, 1)))
        base = builtin(name, d)
        checked = _Checked(base)
        prob = ObjectiveFunction(name, checked, base.bounds, base.known_optimum)
        state = {"last_n": cfg.N_init, "prev_best": np.inf, "bad": []}

        def cb(g, state=state):
            if g.best_f > state["prev_best"]:
                state["bad"].append(f"best rose at G={g.generation}")
            if float(np.min(g.population.fitness)) != g.best_f:
                state["bad"].append("best not at head")
            if len(g.archive) > g.archive.capacity:
                state["bad"].append("archive over capacity")
            state["prev_best"] = g.best_f
            state["pen_n"], state["last_n"] = state["last_n"], g.pop_size

        rec = run(prob, cfg, callback=cb)
        final_gen_n = state.get("pen_n", cfg.N_init)
        if checked.infeasible:
            state["bad"].append(f"{checked.infeasible} infeasible evaluations")
        if checked.calls != rec.evaluations_used:
            state["bad"].append(f"accounting {checked.calls} calls vs {rec.evaluations_used} reported")
        if rec.evaluations_used > cfg.nfes_max + final_gen_n:
            state["bad"].append("budget overshoot")
        trace_f = [f for _, f in rec.trace]
        if any(b > a for a, b in zip(trace_f, trace_f[1:])):
            state["bad"].append("trace not monotone")
        if state["bad"]:
            failures.append(f"run {k} ({name}, D={d}): {state['bad'][:3]}")
    ok = not failures
    acceptance_report("11 invariant suite", ok, "10 fuzzed runs clean" if ok else "; ".join(failures))
    assert ok, failures
