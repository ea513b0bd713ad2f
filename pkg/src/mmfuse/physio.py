"""Arousal and synchrony flags from 1 Hz heart rate."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InsufficientBaselineData
from .model import HeartRateSeries, RawSession
from .statkit import rolling_pearson

MIN_BASELINE_SAMPLES = 30


@dataclass(frozen=True)
class PhysioConfig:
    sync_window: int = 30  # seconds, trailing
    sync_tau: float = 0.0  # mean partner r must exceed this
    min_baseline_samples: int = MIN_BASELINE_SAMPLES


@dataclass(frozen=True)
class PhysioFlags:
    """Per-second flags over ``[start, start + n_seconds)``.

    Seconds without a sample (arousal) or without any valid partner window
    (synchrony) are False; ``mean_pairwise_r`` is NaN there.
    """

    start: int
    n_seconds: int
    arousal: Mapping[str, np.ndarray]
    synchrony: Mapping[str, np.ndarray]
    baseline_bpm: Mapping[str, float]
    mean_pairwise_r: Mapping[str, np.ndarray]


def hr_grid(series: HeartRateSeries | None, t0: int, t1: int) -> np.ndarray:
    out = np.full(t1 - t0, np.nan)
    if series is not None:
        keep = (series.t >= t0) & (series.t < t1)
        out[series.t[keep] - t0] = series.bpm[keep]
    return out


def baseline(hr: HeartRateSeries, phase1: tuple[int, int],
             min_samples: int = MIN_BASELINE_SAMPLES) -> float:
    """Mean bpm over phase 1."""
    keep = (hr.t >= phase1[0]) & (hr.t < phase1[1])
    if keep.sum() < max(min_samples, 1):
        raise InsufficientBaselineData(f"{int(keep.sum())} phase-1 samples, need {min_samples}")
    return float(hr.bpm[keep].mean())


def arousal_flags(bpm: np.ndarray, baseline_bpm: float) -> np.ndarray:
    """``bpm > baseline`` per second; NaN (missing) seconds are False."""
    bpm = np.asarray(bpm, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.nan_to_num(bpm, nan=-np.inf) > baseline_bpm


def mean_partner_correlation(grid: np.ndarray, window: int = 30) -> np.ndarray:
    """``(students x seconds)`` mean trailing-window Pearson r over partners.

    Pairs with a missing sample or a flat window are skipped; NaN where no
    pair is valid.
    """
    n_s, n_t = grid.shape
    total = np.zeros((n_s, n_t))
    count = np.zeros((n_s, n_t))
    for i in range(n_s):
        for j in range(i + 1, n_s):
            r = rolling_pearson(grid[i], grid[j], window)
            ok = np.isfinite(r)
            rr = np.where(ok, r, 0.0)
            total[i] += rr
            total[j] += rr
            count[i] += ok
            count[j] += ok
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, total / np.maximum(count, 1), np.nan)


def synchrony_flags(grid: np.ndarray, window: int = 30, tau: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    mean_r = mean_partner_correlation(grid, window)
    with np.errstate(invalid="ignore"):
        return np.nan_to_num(mean_r, nan=-np.inf) > tau, mean_r


def physio_flags(raw: RawSession, span: tuple[int, int] | None = None,
                 cfg: PhysioConfig = PhysioConfig()) -> PhysioFlags:
    span = span or raw.span()
    t0, t1 = raw.timeline
    t0, t1 = min(t0, span[0]), max(t1, span[1])
    students = raw.students
    grid = np.vstack([hr_grid(raw.heart_rate.get(s), t0, t1) for s in students])
    sync, mean_r = synchrony_flags(grid, cfg.sync_window, cfg.sync_tau)
    a, b = span[0] - t0, span[1] - t0
    arousal, synchrony, base, rbar = {}, {}, {}, {}
    for i, sid in enumerate(students):
        series = raw.heart_rate.get(sid)
        if series is None:
            raise InsufficientBaselineData(f"student {sid}: no heart-rate data")
        base[sid] = baseline(series, raw.phase(1), cfg.min_baseline_samples)
        arousal[sid] = arousal_flags(grid[i, a:b], base[sid])
        synchrony[sid] = sync[i, a:b].copy()
        rbar[sid] = mean_r[i, a:b].copy()
    return PhysioFlags(span[0], span[1] - span[0], arousal, synchrony, base, rbar)


def write_physio_flags(flags: PhysioFlags, path) -> None:
    """Debug dump: ``student_id,t,arousal,synchrony,mean_pairwise_r``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["student_id", "t", "arousal", "synchrony", "mean_pairwise_r"])
        for sid in sorted(flags.arousal):
            for k in range(flags.n_seconds):
                r = flags.mean_pairwise_r[sid][k]
                w.writerow([sid, flags.start + k, int(flags.arousal[sid][k]), int(flags.synchrony[sid][k]),
                            "" if np.isnan(r) else repr(float(r))])
