"""
Ordered parallel map.

Work items are independent; results always come back in input order so
that downstream reductions are canonical and output does not depend on
the thread count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from pirogov.core.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply ``func`` to every item, possibly on a thread pool.

    Args:
        func: Pure function of one work item
        items: Work items
        threads: Worker count (None reads settings, 1 runs inline)

    Returns:
        List[R]: Results in the order of ``items``
    """
    work = list(items)
    if threads is None:
        threads = get_settings().worker_threads
    if threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    logger.debug("ordered_map: %d items on %d threads", len(work), threads)
    with ThreadPoolExecutor(max_workers=min(threads, len(work))) as executor:
        return list(executor.map(func, work))
