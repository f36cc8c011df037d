"""Small numeric and concurrency helpers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    # stable on both tails
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def run_sharded(items: Sequence, workers: int, fn: Callable[[Sequence], None]) -> None:
    """Apply `fn` to shards of `items`; >1 workers uses unsynchronized threads.

    With one worker this is a plain call and fully deterministic.  With more,
    shards update shared state concurrently and races are tolerated.
    """
    if workers <= 1 or len(items) <= 1:
        fn(items)
        return
    shards = [s for s in np.array_split(np.asarray(items, dtype=object), workers) if len(s)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, shards))
