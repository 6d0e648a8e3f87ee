"""Small helpers shared across modules."""

from __future__ import annotations

import math

import numpy as np

STREAM_NAMES = (
    "init", "strategy", "parameters", "mutation", "crossover", "archive", "restart", "local_search",
)


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero (MATLAB ``round``)."""
    return int(math.floor(value + 0.5)) if value >= 0 else -int(math.floor(-value + 0.5))


def spawn_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent named generators derived deterministically from one seed.

    Each component draws from its own stream, so a unit test can replay,
    say, the crossover stream without reproducing every other draw.
    """
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)}
