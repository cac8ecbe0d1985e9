"""Worker-thread plumbing shared by the renderer and the CLI.

The env var CAUSTICA_THREADS caps the number of worker threads (0 or unset
means auto).  Results are always collected in submission order, so thread
count never changes any output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

ENV_VAR = "CAUSTICA_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR, "").strip()
    try:
        cap = int(raw) if raw else 0
    except ValueError:
        cap = 1
    if cap <= 0:
        return os.cpu_count() or 1
    return cap


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """map() preserving order, threaded when it can help."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
