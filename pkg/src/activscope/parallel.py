"""Worker-pool plumbing with a hard cap from ACTIVSCOPE_THREADS."""

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "ACTIVSCOPE_THREADS"


def worker_count():
    """Number of workers to use: ACTIVSCOPE_THREADS if set, else machine cores."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, items, workers=None):
    """Map fn over items, preserving order.

    Uses a thread pool when more than one worker is allowed. Callers must
    ensure fn is independent per item; results are deterministic because
    ordering is restored regardless of completion order.
    """
    items = list(items)
    n = worker_count() if workers is None else max(1, workers)
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
