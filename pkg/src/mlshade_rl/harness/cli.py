"""Command-line entry point: ``mlshade-bench run|compare|trace``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, MLShadeError
from .experiment import (
    VARIANTS,
    ExperimentConfig,
    compare_variants,
    export_trace,
    format_sci,
    load_config_file,
    run_experiment,
    run_matrix,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

DEFAULTS = {
    "problems": "sphere",
    "dim": 10,
    "runs": 25,
    "seed": 0,
    "budget": None,
    "variant": "full",
    "baseline": "no-restart",
    "out": "results",
    "data_dir": None,
    "jobs": 1,
    "alpha": 0.05,
    "trace": False,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlshade-bench",
                                     description="Benchmark harness for the mLSHADE-RL optimizer.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # defaults are None so that config-file values are only overridden by explicit flags
        p.add_argument("--problem", dest="problems", help="comma-separated problems: builtin names "
                       "or base@file[:bias] shift/rotate references")
        p.add_argument("--dim", type=int)
        p.add_argument("--runs", type=int)
        p.add_argument("--seed", type=int, help="base seed; run k uses seed+k")
        p.add_argument("--budget", type=int, help="evaluations per run (default 10000*dim)")
        p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--jobs", type=int, help="parallel worker processes")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--data-dir", dest="data_dir", help="directory of shift/rotate files")

    p_run = sub.add_parser("run", help="run one experiment and write result tables")
    common(p_run)
    p_run.add_argument("--trace", action="store_const", const=True,
                       help="also record and export convergence traces")
    p_cmp = sub.add_parser("compare", help="Wilcoxon comparison of --variant against --baseline")
    common(p_cmp)
    p_cmp.add_argument("--baseline", choices=VARIANTS)
    p_cmp.add_argument("--alpha", type=float)
    p_tr = sub.add_parser("trace", help="export convergence traces as long-format CSV")
    common(p_tr)
    return parser


def _settings(args) -> dict:
    s = dict(DEFAULTS)
    if args.config:
        s.update(load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            s[key] = value
    return s


def _experiment(s: dict, variant: str, trace: bool) -> ExperimentConfig:
    return ExperimentConfig(problems=s["problems"], D=s["dim"], n_runs=s["runs"],
                            base_seed=s["seed"], budget=s["budget"], variant=variant,
                            out=s["out"], data_dir=s["data_dir"], jobs=s["jobs"],
                            record_trace=trace)


def _cmd_run(s) -> None:
    cfg = _experiment(s, s["variant"], bool(s["trace"]))
    table, _ = run_experiment(cfg)
    print(f"{'problem':<24} {'Best':>9} {'Worst':>9} {'Median':>9} {'Mean':>9} {'Std':>9}")
    for name, st in table.items():
        print(f"{name:<24} " + " ".join(f"{format_sci(v):>9}" for v in st))
    print(f"wrote {Path(cfg.out) / 'results.csv'}")


def _cmd_compare(s) -> None:
    cfg_a = _experiment(s, s["variant"], False)
    cfg_b = _experiment(s, s["baseline"], False)
    path = Path(cfg_a.out) / "compare.csv"
    cmp = compare_variants(cfg_a, cfg_b, s["alpha"], path)
    for row in cmp.rows:
        flag = " (insufficient data)" if row["insufficient"] else ""
        print(f"{row['problem']:<24} p={row['p_value']:.3g} {row['verdict']}{flag}")
    t = cmp.tally
    print(f"{cfg_a.variant} vs {cfg_b.variant}: better/similar/worse = "
          f"{t['better']}/{t['similar']}/{t['worse']}")
    print(f"wrote {path}")


def _cmd_trace(s) -> None:
    cfg = _experiment(s, s["variant"], True)
    records = run_matrix(cfg)
    path = Path(cfg.out) / "trace.csv"
    n = export_trace(records, path)
    print(f"wrote {n} rows to {path}")


COMMANDS = {"run": _cmd_run, "compare": _cmd_compare, "trace": _cmd_trace}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = _settings(args)
        COMMANDS[args.command](settings)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MLShadeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
