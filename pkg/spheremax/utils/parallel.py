"""Ordered worker pool.

Results always come back in input order, so any reduction done by the caller
runs in a fixed order regardless of how many workers were used.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)

_worker_limit = 1


def set_worker_limit(workers):
    global _worker_limit
    _worker_limit = max(1, int(workers))
    logger.debug("set_worker_limit: %d", _worker_limit)


def worker_limit():
    return _worker_limit


def ordered_map(func, items, workers=None):
    """Apply ``func`` to every item, returning a list in input order."""
    items = list(items)
    workers = _worker_limit if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))


def pairwise_sum(values):
    """Sum a sequence in a fixed binary-tree order."""
    values = list(values)
    if not values:
        return 0.0
    while len(values) > 1:
        paired = [values[i] + values[i + 1] for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            paired.append(values[-1])
        values = paired
    return values[0]
