"""Order-preserving parallel map.

Work items carry their own derived seeds, so results do not depend on how
items are scheduled over workers; they are always returned in input order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int = 1, chunksize: int = 16) -> list[R]:
    """``[fn(x) for x in items]`` computed on up to ``threads`` worker threads."""
    seq: Sequence[T] = list(items)
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads == 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    chunks = [seq[i : i + chunksize] for i in range(0, len(seq), chunksize)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: [fn(x) for x in c], chunks))
    return [r for part in parts for r in part]
