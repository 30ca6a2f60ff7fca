"""Worker-count policy and an order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def thread_cap() -> int:
    """Worker cap from RPDW_THREADS, defaulting to the hardware count."""
    raw = os.environ.get("RPDW_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"RPDW_THREADS must be an integer, got {raw!r}") from None
        return max(1, value)
    return os.cpu_count() or 1


def ordered_map(fn, items, max_workers: int | None = None) -> list:
    """Apply ``fn`` to ``items`` in parallel; results come back in input order."""
    items = list(items)
    workers = min(max_workers or thread_cap(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
