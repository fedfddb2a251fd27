"""Seeded, sharded sampling of uniformly distributed pure product inputs.

Work is split into shards of a fixed size. Shard ``k`` draws from its own
substream derived from ``(seed, k)``, so results do not depend on how many
workers process the shards.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

SHARD_SIZE = 1 << 16

T = TypeVar("T")


def shard_rng(seed: int, shard: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shard,)))


def shard_sizes(n: int, shard_size: int = SHARD_SIZE) -> list[int]:
    full, rest = divmod(n, shard_size)
    return [shard_size] * full + ([rest] if rest else [])


def sample_angles(rng: np.random.Generator, n: int):
    """``(theta1, theta2, phi1, phi2)`` with cos(theta) and phi uniform."""
    u = rng.uniform(-1.0, 1.0, size=(2, n))
    phi = rng.uniform(0.0, 2 * math.pi, size=(2, n))
    theta = np.arccos(u)
    return theta[0], theta[1], phi[0], phi[1]


def map_shards(fn: Callable[[np.random.Generator, int, int], T], seed: int, n: int,
               workers: int = 1, shard_size: int = SHARD_SIZE) -> list[T]:
    """Run ``fn(rng, size, shard_index)`` on every shard; results in shard order."""
    jobs = list(enumerate(shard_sizes(n, shard_size)))
    run = lambda job: fn(shard_rng(seed, job[0]), job[1], job[0])
    if workers <= 1 or len(jobs) <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))
