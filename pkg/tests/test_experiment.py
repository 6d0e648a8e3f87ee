import csv
import json

import numpy as np
import pytest

from mlshade_rl.errors import ConfigError, ParseError
from mlshade_rl.harness.experiment import (
    ExperimentConfig,
    compare_variants,
    export_trace,
    parse_config_text,
    read_records,
    read_table,
    resolve_problem,
    run_experiment,
    tabulate,
)
from mlshade_rl.harness.stats import summarize
from mlshade_rl.optimizer import RunRecord

TINY = dict(D=4, n_runs=3, budget=3000)


def test_variant_mapping():
    assert ExperimentConfig(["sphere"], variant="no-restart").run_config().restart is False
    assert ExperimentConfig(["sphere"], variant="no-local-search").run_config().local_search is False
    assert ExperimentConfig(["sphere"], variant="binomial-only").run_config().P_c == 0.0
    cfg = ExperimentConfig(["sphere"], variant="single-strategy-MS2").run_config()
    assert cfg.strategy_probs == (0.0, 1.0, 0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(["sphere"], variant="turbo")


def test_resolve_problem(tmp_path):
    assert resolve_problem("ackley", 3).name == "ackley"
    with pytest.raises(ConfigError):
        resolve_problem("nope", 3)
    data = tmp_path / "r.txt"
    data.write_text(" ".join(["1", "2"] + ["1", "0", "0", "1"]))
    prob = resolve_problem("sphere@r.txt:50", 2, data_dir=str(tmp_path))
    assert prob.known_optimum == 50.0 and prob(np.array([1.0, 2.0])) == 50.0
    with pytest.raises(ConfigError):
        resolve_problem("sphere@missing.txt", 2, data_dir=str(tmp_path))
    with pytest.raises(ConfigError):
        resolve_problem("sphere@r.txt", 3, data_dir=str(tmp_path))


def test_bad_problem_fails_before_running(tmp_path):
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(["sphere", "bogus"], out=str(tmp_path / "o"), **TINY))
    assert not (tmp_path / "o" / "results.csv").exists()


def test_run_experiment_outputs(tmp_path):
    cfg = ExperimentConfig(["sphere", "rastrigin"], out=str(tmp_path), record_trace=True, **TINY)
    table, records = run_experiment(cfg)
    assert read_table(tmp_path / "results.csv") == table
    lines = (tmp_path / "table.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0] == "problem,Best,Worst,Median,Mean,Std"
    recs = read_records(tmp_path / "records.jsonl")
    assert len(recs) == 6 and recs[0] == records["sphere"][0]
    errs = [r.error for r in records["rastrigin"]]
    assert table["rastrigin"] == summarize(errs)
    with open(tmp_path / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) - 1 == sum(len(r.trace) for rs in records.values() for r in rs)


def test_identical_config_identical_bytes(tmp_path):
    outs = []
    for k in range(2):
        cfg = ExperimentConfig(["griewank"], out=str(tmp_path / str(k)), **TINY)
        run_experiment(cfg)
        outs.append([(tmp_path / str(k) / f).read_bytes() for f in ("results.csv", "table.csv", "records.jsonl")])
    assert outs[0] == outs[1]


def test_parallel_jobs_same_bytes(tmp_path):
    a = ExperimentConfig(["sphere"], out=str(tmp_path / "a"), **TINY)
    b = ExperimentConfig(["sphere"], out=str(tmp_path / "b"), jobs=2, **TINY)
    run_experiment(a)
    run_experiment(b)
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_compare_self_all_similar(tmp_path):
    cfg = ExperimentConfig(["sphere", "rastrigin"], out=str(tmp_path), n_runs=5, D=4, budget=2000)
    cmp = compare_variants(cfg, cfg, path=tmp_path / "compare.csv")
    assert cmp.tally == {"better": 0, "similar": 2, "worse": 0}
    last = (tmp_path / "compare.csv").read_text().splitlines()[-1]
    assert last.endswith("0/2/0,")


def test_compare_mismatch():
    with pytest.raises(ConfigError):
        compare_variants(ExperimentConfig(["sphere"], n_runs=3), ExperimentConfig(["sphere"], n_runs=4))


def _record(trace, name="p"):
    return RunRecord(name, 0, [0.0], trace[-1][1] if trace else 1.0, None, 10, 1, trace=trace)


def test_export_trace_counts(tmp_path):
    recs = [_record([(k, 100.0 - k) for k in range(100)]) for _ in range(25)]
    n = export_trace(recs, tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert n == 2500 and len(rows) == 2501
    f = [float(r[3]) for r in rows[1:101]]
    assert all(b <= a for a, b in zip(f, f[1:]))


def test_export_trace_empty_and_missing(tmp_path, caplog):
    assert export_trace([], tmp_path / "e.csv") == 0
    assert (tmp_path / "e.csv").read_text() == "problem,run,nfes,best_f\n"
    assert export_trace([_record([])], tmp_path / "m.csv") == 0
    assert "no trace" in caplog.text


def test_tabulate_thresholded_errors():
    recs = {"p": [RunRecord("p", k, [0.0], 1e-9, 0.0, 1, 1) for k in range(3)]}
    assert tuple(tabulate(recs)["p"]) == (0.0, 0.0, 0.0, 0.0, 0.0)


def test_parse_config_text():
    cfg = parse_config_text("# comment\nproblems = sphere,ackley\ndim=5\nruns = 3 # inline\ntrace = yes\n")
    assert cfg == {"problems": "sphere,ackley", "dim": 5, "runs": 3, "trace": True}
    with pytest.raises(ParseError, match="line 2"):
        parse_config_text("dim = 5\nruns = many\n")
    with pytest.raises(ParseError):
        parse_config_text("colour = blue\n")
    with pytest.raises(ParseError):
        parse_config_text("just words\n")


def test_read_table_rejects_garbage(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("problem,best,worst,median,mean,std\nsphere,1,2,x,4,5\n")
    with pytest.raises(ParseError, match="line 2"):
        read_table(p)


def test_records_json_is_plain(tmp_path):
    cfg = ExperimentConfig(["sphere"], out=str(tmp_path), **TINY)
    run_experiment(cfg)
    first = json.loads((tmp_path / "records.jsonl").read_text().splitlines()[0])
    assert {"seed", "error", "evaluations_used", "restarts", "local_searches", "cml_uses"} <= set(first)
