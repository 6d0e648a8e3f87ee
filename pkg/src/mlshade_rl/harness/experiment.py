"""Experiment matrices: run, tabulate, compare variants, export traces."""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError, MLShadeError, ParseError
from ..optimizer import RunConfig, RunRecord, run_many
from ..problem import BUILTIN_NAMES, ObjectiveFunction, builtin, load_shift_rotate, shift_rotate
from .stats import Summary, summarize, tally, wilcoxon_signed_rank

log = logging.getLogger(__name__)

VARIANTS = (
    "full",
    "no-restart",
    "no-local-search",
    "single-strategy-MS1",
    "single-strategy-MS2",
    "single-strategy-MS3",
    "binomial-only",
)
STAT_NAMES = ("best", "worst", "median", "mean", "std")


@dataclass
class ExperimentConfig:
    problems: list[str]
    D: int = 10
    n_runs: int = 25
    base_seed: int = 0
    budget: int | None = None  # None means 10000 * D
    variant: str = "full"
    out: str = "results"
    data_dir: str | None = None
    jobs: int = 1
    record_trace: bool = False
    overrides: dict = field(default_factory=dict)  # extra RunConfig fields

    def __post_init__(self):
        if isinstance(self.problems, str):
            self.problems = [p.strip() for p in self.problems.split(",") if p.strip()]
        if not self.problems:
            raise ConfigError("no problems given")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if self.D < 1:
            raise ConfigError(f"dimension must be positive, got {self.D}")
        if self.n_runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.n_runs}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def run_config(self) -> RunConfig:
        kw = dict(self.overrides)
        kw.update(D=self.D, nfes_max=self.budget, record_trace=self.record_trace)
        if self.variant == "no-restart":
            kw["restart"] = False
        elif self.variant == "no-local-search":
            kw["local_search"] = False
        elif self.variant == "binomial-only":
            kw["P_c"] = 0.0
        elif self.variant.startswith("single-strategy-MS"):
            k = int(self.variant[-1]) - 1
            kw["strategy_probs"] = tuple(1.0 if j == k else 0.0 for j in range(3))
        try:
            return RunConfig(**kw)
        except TypeError as exc:
            raise ConfigError(f"bad run parameter: {exc}") from None


def resolve_problem(spec: str, dim: int, data_dir: str | None = None) -> ObjectiveFunction:
    """A builtin name, or ``base@file[:bias]`` for a shifted/rotated builtin.

    ``file`` holds the shift vector followed by the rotation matrix and is
    looked up relative to ``data_dir`` when not absolute.
    """
    spec = spec.strip()
    if "@" not in spec:
        if spec not in BUILTIN_NAMES:
            raise ConfigError(f"unknown problem {spec!r}; builtins are {', '.join(BUILTIN_NAMES)}")
        return builtin(spec, dim)
    base_name, _, ref = spec.partition("@")
    if base_name not in BUILTIN_NAMES:
        raise ConfigError(f"unknown base problem {base_name!r} in {spec!r}")
    fname, bias = ref, 0.0
    if ":" in ref:
        fname, _, bias_txt = ref.rpartition(":")
        try:
            bias = float(bias_txt)
        except ValueError:
            raise ConfigError(f"bad bias {bias_txt!r} in {spec!r}") from None
    path = Path(fname)
    if not path.is_absolute() and data_dir is not None:
        path = Path(data_dir) / path
    if not path.is_file():
        raise ConfigError(f"data file not found for {spec!r}: {path}")
    try:
        shift, rotation = load_shift_rotate(path, dim)
    except MLShadeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return shift_rotate(builtin(base_name, dim), shift, rotation, bias, name=spec)


def resolve_all(cfg: ExperimentConfig) -> list[ObjectiveFunction]:
    # resolve everything up front so a typo fails before any run starts
    return [resolve_problem(p, cfg.D, cfg.data_dir) for p in cfg.problems]


def _error_value(rec: RunRecord) -> float:
    # without a known optimum the raw objective value stands in for the error
    return rec.best_f if rec.error is None else rec.error


def run_matrix(cfg: ExperimentConfig) -> dict[str, list[RunRecord]]:
    problems = resolve_all(cfg)
    rcfg = cfg.run_config()
    out = {}
    for prob in problems:
        log.info("running %s: %d runs, D=%d, variant %s", prob.name, cfg.n_runs, cfg.D, cfg.variant)
        out[prob.name] = run_many(prob, rcfg, cfg.n_runs, cfg.base_seed, cfg.jobs)
    return out


def format_sci(value: float) -> str:
    return f"{value:.2E}"


def write_table(table: dict[str, Summary], path) -> None:
    """Full-precision statistics; ``repr`` floats so parsing back is exact."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("problem",) + STAT_NAMES)
        for name, s in table.items():
            w.writerow([name] + [repr(float(v)) for v in s])


def write_formatted_table(table: dict[str, Summary], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("problem",) + tuple(n.capitalize() for n in STAT_NAMES))
        for name, s in table.items():
            w.writerow([name] + [format_sci(v) for v in s])


def read_table(path) -> dict[str, Summary]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != ("problem",) + STAT_NAMES:
        raise ParseError(f"{path}: unexpected header {rows[0] if rows else None}", line=1)
    table = {}
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            table[row[0]] = Summary(*(float(v) for v in row[1:]))
        except (ValueError, TypeError, IndexError):
            raise ParseError(f"{path}: malformed row {row}", line=lineno) from None
    return table


def write_records(records: dict[str, list[RunRecord]], path, include_trace: bool = False) -> int:
    n = 0
    with open(path, "w") as fh:
        for problem, recs in records.items():
            for k, rec in enumerate(recs):
                d = rec.to_dict()
                if not include_trace:
                    d.pop("trace")
                d["run"] = k
                fh.write(json.dumps(d, sort_keys=True) + "\n")
                n += 1
    return n


def read_records(path) -> list[RunRecord]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                d = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc.msg}", line=lineno) from None
            d.pop("run", None)
            out.append(RunRecord.from_dict(d))
    return out


def _ensure_dir(path) -> Path:
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path}: {exc.strerror}") from exc
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path} is not writable")
    return path


def tabulate(records: dict[str, list[RunRecord]]) -> dict[str, Summary]:
    return {name: summarize([_error_value(r) for r in recs]) for name, recs in records.items()}


def run_experiment(cfg: ExperimentConfig):
    """Run the matrix and write ``results.csv``, ``table.csv`` and ``records.jsonl`` under ``cfg.out``.

    Returns ``(table, records)``.
    """
    resolve_all(cfg)
    out = _ensure_dir(cfg.out)
    records = run_matrix(cfg)
    table = tabulate(records)
    write_table(table, out / "results.csv")
    write_formatted_table(table, out / "table.csv")
    write_records(records, out / "records.jsonl", include_trace=cfg.record_trace)
    if cfg.record_trace:
        export_trace(records, out / "trace.csv")
    return table, records


@dataclass
class Comparison:
    rows: list[dict]
    tally: dict[str, int]


def compare_variants(cfg_a: ExperimentConfig, cfg_b: ExperimentConfig, alpha: float = 0.05,
                     path=None, records_a: dict[str, list[RunRecord]] | None = None) -> Comparison:
    """Per-problem paired Wilcoxon of ``cfg_a`` against ``cfg_b`` plus the better/similar/worse tally.

    ``records_a`` may carry already computed runs of ``cfg_a`` to avoid repeating them.
    """
    if (cfg_a.problems != cfg_b.problems or cfg_a.n_runs != cfg_b.n_runs
            or cfg_a.base_seed != cfg_b.base_seed or cfg_a.D != cfg_b.D):
        raise ConfigError("compared experiments must share problems, dimension, runs and seeds")
    resolve_all(cfg_a)
    rec_a = run_matrix(cfg_a) if records_a is None else records_a
    rec_b = run_matrix(cfg_b)
    rows = []
    for name in rec_a:
        ea = [_error_value(r) for r in rec_a[name]]
        eb = [_error_value(r) for r in rec_b[name]]
        res = wilcoxon_signed_rank(ea, eb, alpha)
        sa, sb = summarize(ea), summarize(eb)
        rows.append({
            "problem": name,
            "mean_a": sa.mean,
            "mean_b": sb.mean,
            "statistic": res.statistic,
            "p_value": res.p_value,
            "n": res.n,
            "verdict": res.verdict,
            "insufficient": res.insufficient,
        })
    result = Comparison(rows, tally(r["verdict"] for r in rows))
    if path is not None:
        write_comparison(result, path, cfg_a.variant, cfg_b.variant)
    return result


def write_comparison(cmp: Comparison, path, name_a: str = "a", name_b: str = "b") -> None:
    path = Path(path)
    _ensure_dir(path.parent)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", f"mean_{name_a}", f"mean_{name_b}", "statistic", "p_value", "n",
                    "verdict", "insufficient"])
        for r in cmp.rows:
            w.writerow([r["problem"], format_sci(r["mean_a"]), format_sci(r["mean_b"]),
                        repr(r["statistic"]), repr(r["p_value"]), r["n"], r["verdict"],
                        int(r["insufficient"])])
        t = cmp.tally
        w.writerow(["better/similar/worse", "", "", "", "", "", f"{t['better']}/{t['similar']}/{t['worse']}", ""])


def export_trace(records, path) -> int:
    """Long-format convergence data: one ``problem,run,nfes,best_f`` row per trace point.

    ``records`` is a mapping of problem name to runs, or a flat list. Runs
    without a trace are skipped with a warning. Returns the row count.
    """
    if not isinstance(records, dict):
        grouped: dict[str, list] = {}
        for rec in records:
            grouped.setdefault(rec.problem, []).append(rec)
        records = grouped
    path = Path(path)
    _ensure_dir(path.parent)
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["problem", "run", "nfes", "best_f"])
        for problem, recs in records.items():
            for k, rec in enumerate(recs):
                if not rec.trace:
                    log.warning("run %d of %s has no trace; skipped", k, problem)
                    continue
                for nfes, f in rec.trace:
                    w.writerow([problem, k, nfes, repr(float(f))])
                    n += 1
    return n


_INT_KEYS = {"dim", "runs", "seed", "budget", "jobs"}
_FLOAT_KEYS = {"alpha"}
_STR_KEYS = {"problem", "problems", "variant", "baseline", "out", "data_dir", "data-dir"}
_BOOL_KEYS = {"trace"}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, _, value = (s.strip() for s in line.partition("="))
        key = key.replace("-", "_")
        if key == "problem":
            key = "problems"
        if key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ParseError(f"{key} must be an integer, got {value!r}", line=lineno) from None
        elif key in _FLOAT_KEYS:
            try:
                out[key] = float(value)
            except ValueError:
                raise ParseError(f"{key} must be a number, got {value!r}", line=lineno) from None
        elif key in _BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ParseError(f"{key} must be a boolean, got {value!r}", line=lineno)
            out[key] = value.lower() in ("true", "1", "yes")
        elif key in _STR_KEYS or key.replace("_", "-") in _STR_KEYS:
            out[key] = value
        else:
            raise ParseError(f"unknown key {key!r}", line=lineno)
    return out


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return parse_config_text(text)
    except ParseError as exc:
        raise ConfigError(f"{path}: {exc}") from None
