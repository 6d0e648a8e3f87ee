"""Benchmark harness: experiment runner, statistics and CLI."""

from .experiment import (
    VARIANTS,
    ExperimentConfig,
    compare_variants,
    export_trace,
    resolve_problem,
    run_experiment,
)
from .stats import Summary, WilcoxonResult, summarize, wilcoxon_signed_rank

__all__ = [
    "VARIANTS",
    "ExperimentConfig",
    "Summary",
    "WilcoxonResult",
    "compare_variants",
    "export_trace",
    "resolve_problem",
    "run_experiment",
    "summarize",
    "wilcoxon_signed_rank",
]
