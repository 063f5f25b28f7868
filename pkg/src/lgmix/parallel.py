"""Trial-parallel execution helper.

Experiments hand out one deterministic sub-seed per trial, so trial results
are independent of execution order and worker count; this helper just maps
a picklable function over trial indices, sequentially or on a process pool.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def map_trials(fn, keys, workers: int = 1) -> list:
    keys = list(keys)
    if workers <= 1 or len(keys) <= 1:
        return [fn(k) for k in keys]
    chunk = max(1, len(keys) // (4 * workers))
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, keys, chunksize=chunk))
    except (OSError, PermissionError):
        # restricted environments without process support fall back silently
        return [fn(k) for k in keys]
