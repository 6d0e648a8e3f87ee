"""mLSHADE-RL: multi-operator success-history DE with restart and local search."""

from .errors import (
    ConfigError,
    DegenerateInputError,
    EvaluationError,
    InvalidArgumentError,
    MLShadeError,
    NumericalError,
    ParseError,
    ValidationError,
)
from .optimizer import GenerationInfo, RunConfig, RunRecord, run, run_many
from .problem import Bounds, ObjectiveFunction, builtin, builtin_suite, shift_rotate

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "ConfigError",
    "DegenerateInputError",
    "EvaluationError",
    "GenerationInfo",
    "InvalidArgumentError",
    "MLShadeError",
    "NumericalError",
    "ObjectiveFunction",
    "ParseError",
    "RunConfig",
    "RunRecord",
    "ValidationError",
    "builtin",
    "builtin_suite",
    "run",
    "run_many",
    "shift_rotate",
]
