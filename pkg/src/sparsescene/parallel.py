"""Deterministic worker-pool helpers.

Every parallel loop in this package maps a pure function over independent
items and reassembles results in input order, so the output is bit-identical
no matter how many threads run it.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV_VAR = "SPARSESCENE_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Pick the worker count: explicit value, else env var, else all cores."""
    if requested is not None:
        if requested < 1:
            from .errors import ParameterError

            raise ParameterError("thread count must be >= 1, got %d" % requested)
        return requested
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    return os.cpu_count() or 1


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> list[R]:
    """Map ``fn`` over ``items``, preserving order.

    With ``threads`` > 1 the work is spread over a thread pool; results are
    identical to the sequential path because each item is computed
    independently.
    """
    seq: Sequence[T] = items if isinstance(items, Sequence) else list(items)
    if threads <= 1 or len(seq) <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seq))
