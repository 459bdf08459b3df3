"""
Deterministic worker pool helpers for Monte Carlo loops.
"""
import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Seeds are either a plain integer or an entropy tuple accepted by numpy.
Seed = int | tuple[int, ...]


def derive_seed(base: Seed, *indices: int) -> tuple[int, ...]:
    """
    Child seed for (base, index...) that does not depend on execution order.
    Indices are stored shifted by one: SeedSequence ignores trailing zeros, so
    an unshifted (base, 0) would replay the stream of base itself.
    """
    head = base if isinstance(base, tuple) else (int(base),)
    if any(int(i) < 0 for i in indices):
        raise ValueError(f"seed indices must be non-negative, got {indices}")
    return tuple(head) + tuple(int(i) + 1 for i in indices)


def make_rng(seed: Seed) -> np.random.Generator:
    """Generator seeded from an integer or an entropy tuple."""
    if isinstance(seed, tuple):
        return np.random.default_rng(np.random.SeedSequence(list(seed)))
    return np.random.default_rng(seed)


def map_ordered(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Apply fn to every item, returning results in item order."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def pairwise_sum(parts: Sequence[np.ndarray]) -> np.ndarray:
    """Sum arrays in a fixed binary-tree order."""
    if not parts:
        raise ValueError("pairwise_sum needs at least one array")
    level = list(parts)
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def chunk_ranges(total: int, chunk: int) -> list[range]:
    """Split range(total) into consecutive chunks of at most `chunk` items."""
    if total < 1 or chunk < 1:
        raise ValueError("total and chunk must be positive")
    return [range(start, min(start + chunk, total)) for start in range(0, total, chunk)]
