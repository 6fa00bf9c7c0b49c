"""Thread-pool helper honouring the ``VFCOORD_THREADS`` cap."""

import os
from concurrent.futures import ThreadPoolExecutor


def max_workers() -> int:
    raw = os.environ.get("VFCOORD_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def pmap(fn, items):
    """``[fn(i) for i in items]`` evaluated on up to ``max_workers()`` threads, order kept."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))
