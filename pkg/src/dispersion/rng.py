"""Seeded random streams and order-independent replicate summaries.

Replicate ``i`` of a run seeded with ``s`` draws from
``PCG64(SeedSequence(entropy=s, spawn_key=(i,)))``. The stream depends on
``(s, i)`` alone, so results do not depend on how replicates are scheduled
across worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

SEED_MAX = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not (0 <= seed <= SEED_MAX):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def replicate_rng(seed: int, i: int) -> np.random.Generator:
    """Independent generator for replicate ``i``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(i,))))


def uniform_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` points with 53-bit uniform coordinates in [0, 1)."""
    return rng.random((n, d))


def run_replicates(fn: Callable[[np.random.Generator], T], reps: int, seed: int, workers: int = 1) -> list[T]:
    """Evaluate ``fn`` on ``reps`` independent streams; results in replicate order."""
    if reps < 1:
        raise ValueError("reps must be positive")
    if workers < 1:
        raise ValueError("workers must be positive")
    seed = check_seed(seed)

    def block(start: int, stop: int) -> list[T]:
        return [fn(replicate_rng(seed, i)) for i in range(start, stop)]

    if workers == 1 or reps == 1:
        return block(0, reps)
    nblocks = min(reps, workers * 4)
    cuts = [reps * b // nblocks for b in range(nblocks + 1)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(block, cuts[:-1], cuts[1:]))
    return [v for part in parts for v in part]


def z_value(confidence: float) -> float:
    if not (0.0 < confidence < 1.0):
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(0.5 + confidence / 2)


@dataclass(frozen=True)
class Summary:
    """Sample mean with a normal-approximation confidence interval.

    ``std`` and the interval are None for a single replicate.
    """

    mean: float
    std: float | None
    half_width: float | None
    ci: tuple[float, float] | None
    reps: int
    confidence: float

    @property
    def stderr(self) -> float | None:
        return None if self.std is None else self.std / math.sqrt(self.reps)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "stderr": self.stderr,
            "half_width": self.half_width,
            "ci": list(self.ci) if self.ci is not None else None,
            "reps": self.reps,
            "confidence": self.confidence,
            "variance_defined": self.std is not None,
        }


def summarize(values: Sequence[float] | np.ndarray, confidence: float = 0.95) -> Summary:
    """Mean, sample standard deviation and CI via compensated summation."""
    vals = [float(v) for v in values]
    r = len(vals)
    if r == 0:
        raise ValueError("no values to summarize")
    mean = math.fsum(vals) / r
    if r < 2:
        return Summary(mean, None, None, None, r, confidence)
    var = math.fsum((v - mean) ** 2 for v in vals) / (r - 1)
    std = math.sqrt(var)
    h = z_value(confidence) * std / math.sqrt(r)
    return Summary(mean, std, h, (mean - h, mean + h), r, confidence)
