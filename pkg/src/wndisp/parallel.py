"""Deterministic fan-out over contiguous index blocks.

Work is partitioned into contiguous [lo, hi) ranges and results are
reassembled in index order, so the outcome is byte-identical for any worker
count.  Block functions must depend only on their index range (per-path
generator streams guarantee this for all Monte Carlo work in the package).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List


def split_blocks(n_items: int, block_size: int) -> List[tuple]:
    block_size = max(1, block_size)
    return [(lo, min(lo + block_size, n_items)) for lo in range(0, n_items, block_size)]


def run_blocks(fn: Callable, n_items: int, workers: int = 1, max_block: int = 512) -> list:
    """Apply ``fn(lo, hi)`` over a block partition of range(n_items).

    Returns the per-block results in index order.  ``max_block`` caps the
    block size (memory guard); with more than one worker, blocks are also
    kept small enough to occupy the pool.  ``workers <= 1`` runs in-process.
    """
    if n_items <= 0:
        return []
    size = min(max_block, n_items)
    if workers > 1:
        size = min(size, math.ceil(n_items / (2 * workers)))
    ranges = split_blocks(n_items, size)
    if workers <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]
