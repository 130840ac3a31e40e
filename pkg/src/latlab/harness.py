"""Seeded trial dispatch.

A trial is a pure function of its index (all randomness comes from
``trial_rng(seed, trial)``), so results do not depend on how trials are
split between workers; they are always returned in trial order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

THREADS_ENV = "LATLAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else ``$LATLAB_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("thread count must be >= 1")
    return threads


def _run_chunk(func, indices):
    return [func(i) for i in indices]


def run_trials(func: Callable[[int], T], count: int, threads: int | None = None, start: int = 0) -> list[T]:
    """``[func(start), ..., func(start + count - 1)]``, optionally in worker processes."""
    threads = resolve_threads(threads)
    indices = list(range(start, start + count))
    if threads == 1 or count < 2:
        return [func(i) for i in indices]
    chunks = [indices[j::threads] for j in range(threads)]
    results: dict[int, T] = {}
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_chunk, func, ch) for ch in chunks if ch]
        for ch, fut in zip([c for c in chunks if c], futures):
            for i, r in zip(ch, fut.result()):
                results[i] = r
    return [results[i] for i in indices]


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and ``std / sqrt(count)`` (ddof = 1)."""
    import numpy as np

    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise ValueError("no samples")
    if a.size == 1:
        return float(a[0]), 0.0
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(a.size))
