"""Objective functions, search boxes, and the built-in benchmark suite.

Every objective maps a length-``D`` vector to a float and is expected to be
pure, so the same problem object can be shared across concurrent runs.
The built-in suite mirrors the unimodal/multimodal split of the CEC suites
without their proprietary shift and rotation data; :func:`load_shift_rotate`
and :func:`shift_rotate` let users rebuild CEC-style problems from their own
data files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import EvaluationError, InvalidArgumentError, ParseError, ValidationError

ORTHONORMAL_TOL = 1e-9
BUILTIN_RANGE = 100.0


@dataclass(frozen=True)
class Bounds:
    """Box constraints ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float)).copy()
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float)).copy()
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size < 1:
            raise InvalidArgumentError(
                f"bounds must be two vectors of equal length >= 1, got {lower.shape} and {upper.shape}"
            )
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise InvalidArgumentError("bounds must be finite")
        if np.any(lower >= upper):
            raise InvalidArgumentError("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, dim: int, low: float = -BUILTIN_RANGE, high: float = BUILTIN_RANGE) -> "Bounds":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def clip(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def __eq__(self, other):
        if not isinstance(other, Bounds):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@dataclass(frozen=True, eq=False)
class ObjectiveFunction:
    """A named, bounded objective ``f: R^D -> R`` to be minimized.

    ``known_optimum`` is the optimal value used for error reporting and
    ``optimum_x`` (optional) a point attaining it.
    """

    name: str
    func: Callable[[np.ndarray], float]
    bounds: Bounds
    known_optimum: float | None = None
    optimum_x: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def __call__(self, x) -> float:
        return evaluate(self, x)


def evaluate(problem: ObjectiveFunction, x) -> float:
    """Evaluate ``problem`` at ``x``.

    Raises InvalidArgumentError on a dimension mismatch and EvaluationError
    when the objective produces a non-finite value.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise InvalidArgumentError(
            f"{problem.name}: expected a vector of length {problem.dim}, got shape {x.shape}"
        )
    value = float(problem.func(x))
    if not math.isfinite(value):
        raise EvaluationError(f"objective {problem.name!r} returned non-finite value {value}")
    return value


# -- built-in functions -------------------------------------------------------
# Written so the value at the optimum is exactly 0.0 and every term is >= 0.

def sphere(x: np.ndarray) -> float:
    return float(np.dot(x, x))


def ellipsoid(x: np.ndarray) -> float:
    d = x.size
    if d == 1:
        return float(x[0] * x[0])
    weights = 10.0 ** (6.0 * np.arange(d) / (d - 1))
    return float(np.dot(weights, x * x))


def rosenbrock(x: np.ndarray) -> float:
    head, tail = x[:-1], x[1:]
    return float(np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2))


def rastrigin(x: np.ndarray) -> float:
    # 10 D + sum(x^2 - 10 cos(2 pi x)), regrouped so each term is non-negative
    return float(np.sum(x * x + 10.0 * (1.0 - np.cos(2.0 * np.pi * x))))


def ackley(x: np.ndarray) -> float:
    n = x.size
    a = -0.2 * math.sqrt(float(np.dot(x, x)) / n)
    b = float(np.sum(np.cos(2.0 * np.pi * x))) / n
    return 20.0 * (1.0 - math.exp(a)) + (math.e - math.exp(b))


def griewank(x: np.ndarray) -> float:
    i = np.arange(1, x.size + 1)
    return float(1.0 + np.dot(x, x) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))))


def schwefel_1_2(x: np.ndarray) -> float:
    partial = np.cumsum(x)
    return float(np.dot(partial, partial))


# name -> (function, optimum point factory)
_BUILTINS: dict[str, tuple[Callable[[np.ndarray], float], Callable[[int], np.ndarray]]] = {
    "sphere": (sphere, np.zeros),
    "ellipsoid": (ellipsoid, np.zeros),
    "rosenbrock": (rosenbrock, np.ones),
    "rastrigin": (rastrigin, np.zeros),
    "ackley": (ackley, np.zeros),
    "griewank": (griewank, np.zeros),
    "schwefel_1_2": (schwefel_1_2, np.zeros),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin(name: str, dim: int) -> ObjectiveFunction:
    """Return the built-in problem ``name`` at dimension ``dim`` on [-100, 100]^dim."""
    try:
        func, opt = _BUILTINS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown builtin problem {name!r}; choose from {', '.join(BUILTIN_NAMES)}"
        ) from None
    if dim < 1:
        raise InvalidArgumentError(f"dimension must be positive, got {dim}")
    return ObjectiveFunction(name, func, Bounds.box(dim), known_optimum=0.0, optimum_x=opt(dim))


def builtin_suite(dim: int) -> list[ObjectiveFunction]:
    """All built-in problems at dimension ``dim`` (``dim >= 2``)."""
    if dim < 2:
        raise InvalidArgumentError(f"the builtin suite needs dim >= 2, got {dim}")
    return [builtin(name, dim) for name in BUILTIN_NAMES]


# -- shift / rotate composition ----------------------------------------------

@dataclass(frozen=True, eq=False)
class ShiftRotateProblem:
    """Callable computing ``base(M @ (x - o)) + f_bias``.

    Kept as a plain dataclass (rather than a closure) so composed problems
    stay picklable for process-parallel runs.
    """

    base: Callable[[np.ndarray], float]
    shift: np.ndarray
    rotation: np.ndarray
    f_bias: float = 0.0

    def __call__(self, x: np.ndarray) -> float:
        return float(self.base(self.rotation @ (x - self.shift))) + self.f_bias


def shift_rotate(base: ObjectiveFunction, shift, rotation, f_bias: float = 0.0,
                 name: str | None = None) -> ObjectiveFunction:
    """Compose ``base`` with a shift vector, rotation matrix, and bias."""
    shift = np.asarray(shift, dtype=float)
    rotation = np.asarray(rotation, dtype=float)
    d = base.dim
    if shift.shape != (d,) or rotation.shape != (d, d):
        raise InvalidArgumentError(
            f"shift/rotation shapes {shift.shape}/{rotation.shape} do not match dimension {d}"
        )
    optimum = None if base.known_optimum is None else base.known_optimum + f_bias
    optimum_x = None
    if base.optimum_x is not None:
        # M is orthonormal, so M @ (x - o) = x* solves to x = o + M^T x*
        optimum_x = shift + rotation.T @ base.optimum_x
    return ObjectiveFunction(
        name or f"{base.name}_sr",
        ShiftRotateProblem(base.func, shift, rotation, float(f_bias)),
        base.bounds,
        known_optimum=optimum,
        optimum_x=optimum_x,
    )


def load_shift_rotate(path, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Read a shift vector and rotation matrix from a whitespace-separated text file.

    The file holds ``dim`` shift values followed by ``dim * dim`` rotation
    entries in row-major order, split across lines however the author likes.
    The rotation must be orthonormal to within 1e-9.
    """
    if dim < 1:
        raise InvalidArgumentError(f"dimension must be positive, got {dim}")
    expected = dim * (dim + 1)
    values: list[float] = []
    last_line = 0
    with open(Path(path)) as fh:
        for lineno, line in enumerate(fh, start=1):
            for token in line.split():
                try:
                    values.append(float(token))
                except ValueError:
                    raise ParseError(f"not a number: {token!r}", line=lineno) from None
                if len(values) > expected:
                    raise ParseError(
                        f"too many values: expected {expected} for D={dim}", line=lineno
                    )
            last_line = lineno
    if len(values) != expected:
        raise ParseError(
            f"expected {expected} values for D={dim} (shift + rotation), found {len(values)}",
            line=last_line,
        )
    data = np.array(values)
    if not np.all(np.isfinite(data)):
        raise ParseError("non-finite value in data file")
    shift = data[:dim].copy()
    rotation = data[dim:].reshape(dim, dim)
    deviation = np.max(np.abs(rotation @ rotation.T - np.eye(dim)))
    if deviation > ORTHONORMAL_TOL:
        raise ValidationError(
            f"rotation matrix is not orthonormal (max |M M^T - I| = {deviation:.3e})"
        )
    return shift, rotation
