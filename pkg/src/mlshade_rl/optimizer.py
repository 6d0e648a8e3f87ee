"""One complete mLSHADE-RL run and batches of independent runs."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._util import round_half_up, spawn_streams
from .adaptation import (
    FSource,
    ParameterMemory,
    SinusoidSelector,
    StrategyState,
    assign_strategies,
    lpsr,
    sample_CR,
    sample_F,
    update_memories,
    update_sinusoid_selector,
    update_strategy_probs,
)
from .cml import CmlConfig, choose_crossover, crossover_many, eigenbasis
from .engine import (
    MIN_POPULATION,
    Archive,
    Population,
    initialize_population,
    mutate_many,
    weighted_f,
)
from .errors import ConfigError
from .local_search import LocalSearchState, maybe_local_search
from .problem import ObjectiveFunction
from .restart import StagnationTracker, apply_restart, record_counters

ERROR_THRESHOLD = 1e-8


@dataclass
class RunConfig:
    """Every tunable of a run. ``None`` fields resolve from ``D`` on construction."""

    D: int
    nfes_max: int | None = None
    N_init: int | None = None
    N_min: int = 4
    seed: int = 0
    H: int = 5
    P_c: float = 0.4
    P_s: float = 0.5
    p: float = 0.11
    L_p: int = 20
    epsilon: float = 0.01
    f_q: float = 0.5
    archive_rate: float = 2.6
    count_threshold: int | None = None
    vol_threshold: float = 1e-3
    ls_gate: float = 0.85
    P_LS_init: float = 0.01
    ls_rate: float = 0.01
    restart: bool = True
    local_search: bool = True
    # fixed strategy probabilities; None means adaptive over all three
    strategy_probs: tuple[float, float, float] | None = None
    record_trace: bool = True

    def __post_init__(self):
        if self.D < 1:
            raise ConfigError(f"dimension must be positive, got {self.D}")
        if self.nfes_max is None:
            self.nfes_max = 10000 * self.D
        if self.N_init is None:
            self.N_init = 18 * self.D
        if self.count_threshold is None:
            self.count_threshold = 2 * self.D
        if self.N_min < MIN_POPULATION:
            raise ConfigError(f"N_min must be >= {MIN_POPULATION}, got {self.N_min}")
        if self.N_init < self.N_min:
            raise ConfigError(f"N_init ({self.N_init}) must be >= N_min ({self.N_min})")
        if self.nfes_max < self.N_init:
            raise ConfigError(
                f"budget {self.nfes_max} is smaller than the initial population {self.N_init}"
            )
        if self.H < 1:
            raise ConfigError(f"memory size must be >= 1, got {self.H}")
        for name in ("P_c", "P_s", "p", "ls_gate", "P_LS_init", "ls_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.strategy_probs is not None:
            probs = tuple(float(v) for v in self.strategy_probs)
            if len(probs) != 3 or min(probs) < 0 or sum(probs) <= 0:
                raise ConfigError(f"strategy_probs must be three non-negative weights, got {probs}")
            self.strategy_probs = probs

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class RunRecord:
    problem: str
    seed: int
    best_x: list[float]
    best_f: float
    error: float | None
    evaluations_used: int
    generations: int
    trace: list[tuple[int, float]] = field(default_factory=list)
    restarts: int = 0
    local_searches: int = 0
    local_search_improvements: int = 0
    local_search_evaluations: int = 0
    cml_uses: int = 0
    final_pop_size: int = 0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["trace"] = [[int(n), float(f)] for n, f in self.trace]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        d = dict(d)
        d["trace"] = [(int(n), float(f)) for n, f in d.get("trace", [])]
        return cls(**d)


@dataclass
class GenerationInfo:
    """Snapshot handed to the optional per-generation callback.

    ``population`` and ``archive`` are live references; treat them as read-only.
    """

    generation: int
    nfes: int
    lpsr_nfes: int
    pop_size: int
    strategy_probs: np.ndarray
    sinusoid_probs: np.ndarray
    best_f: float
    population: Population
    archive: Archive
    vol: float


def error_of(best_f: float, known_optimum: float | None) -> float | None:
    """Distance to the known optimum, reported as exactly 0 at or below 1e-8."""
    if known_optimum is None:
        return None
    err = abs(best_f - known_optimum)
    return 0.0 if err <= ERROR_THRESHOLD else err


def run(problem: ObjectiveFunction, cfg: RunConfig,
        callback: Callable[[GenerationInfo], None] | None = None) -> RunRecord:
    """Minimize ``problem`` once under ``cfg``. Deterministic in ``cfg.seed``."""
    bounds = problem.bounds
    D = bounds.dim
    if cfg.D != D:
        raise ConfigError(f"config dimension {cfg.D} does not match problem dimension {D}")
    rng = spawn_streams(cfg.seed)
    nfes_max = cfg.nfes_max

    pop = initialize_population(bounds, cfg.N_init, rng["init"], problem)
    pop.sort()
    nfes = pop.size
    archive = Archive.from_population(
        pop, round_half_up(cfg.archive_rate * cfg.N_init), rng["archive"])
    mem = ParameterMemory(cfg.H)
    selector = SinusoidSelector(cfg.L_p, cfg.epsilon)
    strategy = StrategyState(adaptive=cfg.strategy_probs is None)
    if cfg.strategy_probs is not None:
        strategy.probs = np.array(cfg.strategy_probs)
    tracker = StagnationTracker.create(pop.size, D, cfg.vol_threshold, cfg.count_threshold)
    ls_state = LocalSearchState(cfg.P_LS_init, max(1, round_half_up(cfg.ls_rate * nfes_max)),
                                cfg.ls_gate)
    cml_cfg = CmlConfig(cfg.P_c, cfg.P_s)
    G_max = nfes_max / cfg.N_init

    record = RunRecord(problem.name, cfg.seed, [], float(pop.fitness[0]), None, nfes, 0)
    if cfg.record_trace:
        record.trace.append((nfes, float(pop.fitness[0])))

    G = 0
    while nfes < nfes_max:
        G += 1
        pop.generation = G
        N = pop.size
        targets = pop.X

        kinds = assign_strategies(strategy, N, rng["strategy"])
        slots = rng["parameters"].integers(cfg.H, size=N)
        F, source, freq = sample_F(mem, selector, G, G_max, cfg.f_q, rng["parameters"], N, slots)
        CR = sample_CR(mem, rng["parameters"], N, slots)
        Fw = weighted_f(F, nfes, nfes_max)

        mutants = mutate_many(kinds, np.arange(N), pop, archive, F, Fw, cfg.p, rng["mutation"], bounds)
        use_cml = choose_crossover(cml_cfg, rng["crossover"], N)
        basis = eigenbasis(pop, cml_cfg) if np.any(use_cml) else None
        if basis is not None:
            record.cml_uses += int(use_cml.sum())
        trials = crossover_many(targets, mutants, CR, use_cml, basis, rng["crossover"], bounds)

        trial_f = np.array([problem(u) for u in trials])
        nfes += N

        old_f = pop.fitness.copy()
        won = trial_f < old_f
        record_counters(tracker, trial_f, old_f)
        archive.add_many(targets[won])
        pop.X = np.where(won[:, None], trials, targets)
        pop.fitness = np.where(won, trial_f, old_f)

        # success bookkeeping, aligned with this generation's ordering
        deltas = old_f[won] - trial_f[won]
        adaptive_sin = won & (source == FSource.SIN_ADAPTIVE)
        successes = [np.sum(won & (source == s)) for s in (FSource.SIN_DECREASING, FSource.SIN_ADAPTIVE)]
        failures = [np.sum(~won & (source == s)) for s in (FSource.SIN_DECREASING, FSource.SIN_ADAPTIVE)]
        new_f = pop.fitness.copy()

        order = pop.sort()
        tracker.reorder(order)
        if cfg.restart:
            res = apply_restart(pop, tracker, bounds, rng["restart"], problem, archive,
                                budget=max(0, nfes_max - nfes))
            nfes += res.evaluations
            record.restarts += res.evaluations
            if res.replaced:
                tracker.reorder(pop.sort())

        if strategy.adaptive:
            update_strategy_probs(strategy, old_f, new_f, kinds)
        selector.record(successes, failures)
        update_sinusoid_selector(selector, G)
        update_memories(mem, F[won], CR[won], freq[adaptive_sin], deltas,
                        old_f[adaptive_sin] - trial_f[adaptive_sin])

        lpsr_nfes = nfes
        target_size = lpsr(cfg.N_init, cfg.N_min, nfes, nfes_max)
        if target_size < pop.size:
            keep = np.arange(target_size)
            pop.keep(keep)
            tracker.reorder(keep)
            archive.resize(round_half_up(cfg.archive_rate * pop.size))

        if cfg.local_search and nfes >= ls_state.active_after * nfes_max and nfes < nfes_max:
            refined, used, ls_state = maybe_local_search(
                pop[0], problem, ls_state, nfes, nfes_max, rng["local_search"])
            if used:
                record.local_searches += 1
                record.local_search_evaluations += used
                nfes += used
            if refined is not None:
                record.local_search_improvements += 1
                pop.X[0] = refined.x
                pop.fitness[0] = refined.fitness

        if cfg.record_trace:
            record.trace.append((nfes, float(pop.fitness[0])))
        if callback is not None:
            callback(GenerationInfo(G, nfes, lpsr_nfes, pop.size, strategy.probs.copy(),
                                    selector.probs.copy(), float(pop.fitness[0]), pop, archive,
                                    tracker.vol))

    best = pop.best()
    record.best_x = [float(v) for v in best.x]
    record.best_f = best.fitness
    record.error = error_of(best.fitness, problem.known_optimum)
    record.evaluations_used = nfes
    record.generations = G
    record.final_pop_size = pop.size
    return record


def _run_seed(args):
    problem, cfg = args
    return run(problem, cfg)


def run_many(problem: ObjectiveFunction, cfg: RunConfig, n_runs: int, base_seed: int = 0,
             jobs: int = 1) -> list[RunRecord]:
    """``n_runs`` independent runs seeded ``base_seed + k``, returned in run order."""
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    work = [(problem, cfg.replace(seed=base_seed + k)) for k in range(n_runs)]
    if jobs <= 1:
        return [_run_seed(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_seed, work))
