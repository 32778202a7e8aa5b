"""Deterministic parallel map over sweep points."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np


def point_rng(seed: int, *index: int) -> np.random.Generator:
    """Independent stream for the sweep point ``index`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, *index]))


def _call(job: tuple[Callable[..., Any], tuple[Any, ...]]) -> Any:
    fn, args = job
    return fn(*args)


def parallel_map(fn: Callable[..., Any], tasks: Sequence[tuple[Any, ...]], threads: int = 1) -> list[Any]:
    """``[fn(*t) for t in tasks]`` in task order, spread over ``threads`` processes.

    Results do not depend on ``threads`` because every task carries its own
    seed material and assembly is by index.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    jobs = [(fn, tuple(t)) for t in tasks]
    if threads == 1 or len(jobs) <= 1:
        return [_call(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_call, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
