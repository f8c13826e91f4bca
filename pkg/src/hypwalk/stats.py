"""Estimates, deterministic block seeding and block-parallel execution."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

BLOCK_SIZE = 256


@dataclass(frozen=True)
class Estimate:
    """Sample mean/variance with the seed that produced it.

    ``variance`` is the unbiased sample variance; ``m2`` keeps the centred sum
    of squares so that estimates merge exactly (Chan et al. pairwise update).
    """

    mean: float
    variance: float
    count: int
    seed: int | None = None
    m2: float = 0.0

    @property
    def standard_error(self) -> float:
        if self.count == 0:
            return math.nan
        return math.sqrt(self.variance / self.count)

    @classmethod
    def from_samples(cls, x, seed=None) -> "Estimate":
        x = np.asarray(x, dtype=float)
        n = x.size
        if n == 0:
            return cls(math.nan, math.nan, 0, seed, 0.0)
        mean = float(x.mean())
        m2 = float(((x - mean) ** 2).sum())
        var = m2 / (n - 1) if n > 1 else 0.0
        return cls(mean, var, n, seed, m2)

    def merge(self, other: "Estimate") -> "Estimate":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        var = m2 / (n - 1) if n > 1 else 0.0
        return Estimate(mean, var, n, self.seed, m2)

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.mean * factor, self.variance * factor**2, self.count,
                        self.seed, self.m2 * factor**2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["standard_error"] = self.standard_error
        return d


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based generator for block ``block`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def block_sizes(samples: int, block_size: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(samples, block_size)
    return [block_size] * full + ([rest] if rest else [])


def default_workers() -> int:
    return os.cpu_count() or 1


def run_blocks(fn: Callable, args: Sequence[tuple], workers: int = 1) -> list:
    """Evaluate ``fn(*a)`` for every block; results come back in block order."""
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))
