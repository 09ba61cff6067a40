import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def thread_count() -> int:
    raw = os.environ.get("RIESZ_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunked_map(fn, values: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Apply a vectorised ``fn`` over chunks of ``values``; order is preserved."""
    values = np.asarray(values)
    if values.size <= chunk:
        return np.asarray(fn(values))
    pieces = [values[i : i + chunk] for i in range(0, values.size, chunk)]
    workers = min(thread_count(), len(pieces))
    if workers == 1:
        return np.concatenate([np.asarray(fn(p)) for p in pieces])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.concatenate([np.asarray(r) for r in pool.map(fn, pieces)])
