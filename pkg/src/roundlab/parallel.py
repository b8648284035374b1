"""Deterministic partitioned execution.

Work is split into fixed partitions before any worker starts, and results
merge in partition order, so outputs never depend on the worker count.
Worker functions must be module-level and their arguments picklable.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence


def run_partitions(fn: Callable, args_list: Sequence, workers: int = 1) -> list:
    if workers <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))
