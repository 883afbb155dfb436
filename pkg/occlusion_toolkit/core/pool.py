# SPDX-License-Identifier: Apache-2.0

"""Ordered worker pool used for per-image and per-candidate evaluations."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .config import config

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(
    func: Callable[[T], R], items: Iterable[T], threads: int = 0
) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    Args:
        func: Pure function to apply
        items: Inputs
        threads: Worker cap; 0 uses the configured default, 1 runs inline

    Returns:
        List of results, ordered like ``items``
    """
    items = list(items)
    workers = threads or config.THREADS
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(func, items))
