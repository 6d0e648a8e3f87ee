"""Desk-scale version of the benchmark protocol.

Runs the full algorithm on every builtin problem (25 runs, 10000*D
evaluations by default), writes the best/worst/median/mean/std summary table, then compares
the full algorithm against each ablation variant with the paired Wilcoxon
test and prints the better/similar/worse tallies.

    python3 scripts/reproduce_protocol.py --dim 10 --runs 25 --out protocol_out
    python3 scripts/reproduce_protocol.py --dim 5 --runs 5 --skip-ablations   # quick look
"""

import argparse
import logging
from pathlib import Path

from mlshade_rl.harness.experiment import (
    VARIANTS,
    ExperimentConfig,
    compare_variants,
    format_sci,
    run_experiment,
)
from mlshade_rl.problem import BUILTIN_NAMES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--runs", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--problems", default=",".join(BUILTIN_NAMES))
    ap.add_argument("--data-dir", default=None)
    ap.add_argument("--out", default="protocol_out")
    ap.add_argument("--skip-ablations", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out)

    def config(variant):
        return ExperimentConfig(args.problems, D=args.dim, n_runs=args.runs, base_seed=args.seed,
                                budget=args.budget, variant=variant, out=str(out / variant),
                                data_dir=args.data_dir, jobs=args.jobs)

    table, full_records = run_experiment(config("full"))
    print(f"\n{'problem':<16}" + "".join(f"{h:>10}" for h in ("Best", "Worst", "Median", "Mean", "Std")))
    for name, s in table.items():
        print(f"{name:<16}" + "".join(f"{format_sci(v):>10}" for v in s))

    if args.skip_ablations:
        return
    print()
    for variant in VARIANTS[1:]:
        cmp = compare_variants(config("full"), config(variant),
                               path=out / f"full_vs_{variant}.csv", records_a=full_records)
        t = cmp.tally
        print(f"full vs {variant:<22} better/similar/worse = {t['better']}/{t['similar']}/{t['worse']}")


if __name__ == "__main__":
    main()
