"""Deterministic seeding helpers for parallel Monte Carlo.

Every replication batch draws from a child ``SeedSequence`` constructed
directly from ``(master seed, spawn key)``, never by mutating a parent
sequence.  Results are therefore identical however the batches are
scheduled (serial, threaded, or re-run in isolation).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

# Fixed batch sizes keep the stream layout (and hence every draw) independent
# of replication counts requested by the caller or of the thread count.
PATH_BATCH = 8192
LIMIT_BATCH = 65536

T = TypeVar("T")


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *key)``."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


def batch_sizes(total: int, batch: int) -> list[int]:
    """Split ``total`` replications into fixed-size batches (last one short)."""
    if total <= 0:
        return []
    full, rem = divmod(total, batch)
    out = [batch] * full
    if rem:
        out.append(rem)
    return out


def ordered_map(
    fn: Callable[..., T],
    items: Sequence,
    threads: int = 1,
) -> list[T]:
    """Map ``fn`` over ``items`` preserving order; threaded when asked.

    The reduction order never depends on ``threads``, so outputs are
    bit-identical for any thread count.
    """
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
