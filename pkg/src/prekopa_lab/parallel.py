"""Order-preserving parallel map.

Workers only ever fill result slots by index; callers reduce afterwards in
a fixed order, so the worker count never changes any number.
"""

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "PREKOPA_LAB_THREADS"


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = os.environ.get(THREADS_ENV, "1")
    workers = int(workers)
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def ordered_map(fn, items, workers=None) -> list:
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
