"""Run-length helpers over boolean per-second series."""
from __future__ import annotations

import numpy as np


def run_bounds(mask) -> tuple[np.ndarray, np.ndarray]:
    """Start and (exclusive) end indices of every maximal run of True."""
    m = np.asarray(mask, dtype=bool).astype(np.int8)
    d = np.diff(np.r_[0, m, 0])
    return np.flatnonzero(d == 1), np.flatnonzero(d == -1)


def in_long_run(mask, min_len: int) -> np.ndarray:
    """True where the element lies in a maximal True run of length >= ``min_len``."""
    mask = np.asarray(mask, dtype=bool)
    out = np.zeros(mask.shape, dtype=bool)
    for s, e in zip(*run_bounds(mask)):
        if e - s >= min_len:
            out[s:e] = True
    return out


def max_run(mask) -> int:
    starts, ends = run_bounds(mask)
    return int((ends - starts).max()) if starts.size else 0
