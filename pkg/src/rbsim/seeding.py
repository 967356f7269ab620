"""Deterministic seed derivation and the parallel-map execution shape.

Every unit of work (one sequence, one repetition stream) owns a generator
seeded from ``seed_plan(master, j, rep)``, so results are bit-identical
regardless of thread count or scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["seed_plan", "generator_for", "parallel_map"]

_MASK = (1 << 64) - 1


def _splitmix64(v: int) -> int:
    v = (v + 0x9E3779B97F4A7C15) & _MASK
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _MASK
    return (v ^ (v >> 31)) & _MASK


def seed_plan(master_seed: int, j: int, rep: int = 0) -> int:
    """Collision-free 64-bit stream seed for work unit (j, rep)."""
    v = master_seed & _MASK
    v = _splitmix64(v ^ _splitmix64((j & _MASK) ^ 0xA5A5A5A5A5A5A5A5))
    v = _splitmix64(v ^ _splitmix64((rep & _MASK) ^ 0x5A5A5A5A5A5A5A5A))
    return v


def generator_for(master_seed: int, j: int, rep: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_plan(master_seed, j, rep)))


def parallel_map(fn, items, threads: int = 1) -> list:
    """Order-preserving map; items must be independent for determinism."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
