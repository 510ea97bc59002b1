"""
Thread-pool fan-out for independent work items (query chunks, slices,
probe centres). Results come back in submission order.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from mqpsh.core.config import settings
from mqpsh.core.logger import logger

T = TypeVar("T")
R = TypeVar("R")


def fan_out(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    items = list(items)
    workers = min(threads or settings.worker_count, len(items))
    if workers <= 1:
        return [fn(item) for item in items]

    logger.debug("fan_out_started", items=len(items), workers=workers)
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="mqpsh") as pool:
        return list(pool.map(fn, items))
