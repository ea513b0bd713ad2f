"""Small statistical primitives: correlation, ranks, Mann-Whitney U, Bonferroni."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyGroup, LengthMismatch, ZeroVariance

EXACT_MAX_N = 20


class Method(str, Enum):
    EXACT = "Exact"
    NORMAL_APPROX = "NormalApprox"


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: Method
    n1: int
    n2: int

    __test__ = False  # not a pytest class

    @property
    def u_other(self) -> float:
        """U for the second sample; ``statistic + u_other == n1 * n2``."""
        return self.n1 * self.n2 - self.statistic


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("need at least two paired observations")
    return x, y


def pearson(x, y) -> float:
    """Sample Pearson correlation using the two-pass (mean-subtracted) formula."""
    x, y = _pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0 or np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVariance("correlation undefined for a constant series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def rankdata(a) -> np.ndarray:
    """1-based ranks with ties given their average rank."""
    a = np.asarray(a, dtype=float).ravel()
    order = np.argsort(a, kind="mergesort")
    sorted_a = a[order]
    ranks = np.empty(a.size, dtype=float)
    # boundaries of tie blocks
    starts = np.flatnonzero(np.r_[True, sorted_a[1:] != sorted_a[:-1]])
    ends = np.r_[starts[1:], a.size]
    for s, e in zip(starts, ends):
        ranks[order[s:e]] = (s + e + 1) / 2.0
    return ranks


def spearman(x, y) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    x, y = _pair(x, y)
    return pearson(rankdata(x), rankdata(y))


def rolling_pearson(x, y, window: int) -> np.ndarray:
    """Trailing-window Pearson r at every index.

    Entry ``t`` uses samples ``t - window + 1 .. t``. It is NaN where the
    window is incomplete, contains a NaN, or either series is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"lengths differ: {x.size} vs {y.size}")
    out = np.full(x.size, np.nan)
    if window < 2 or x.size < window:
        return out
    wx = np.lib.stride_tricks.sliding_window_view(x, window)
    wy = np.lib.stride_tricks.sliding_window_view(y, window)
    ok = np.isfinite(wx).all(axis=1) & np.isfinite(wy).all(axis=1)
    with np.errstate(invalid="ignore"):
        ok &= (np.ptp(wx, axis=1) > 0) & (np.ptp(wy, axis=1) > 0)
    if not ok.any():
        return out
    dx = wx[ok] - wx[ok].mean(axis=1, keepdims=True)
    dy = wy[ok] - wy[ok].mean(axis=1, keepdims=True)
    r = (dx * dy).sum(axis=1) / np.sqrt((dx * dx).sum(axis=1) * (dy * dy).sum(axis=1))
    out[window - 1:][ok] = np.clip(r, -1.0, 1.0)
    return out


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _u_distribution(n1: int, n2: int) -> np.ndarray:
    """Counts of rank arrangements giving each U value 0..n1*n2."""
    # f[m][n] holds the count vector for sizes (m, n); recursion
    # f(m, n, u) = f(m-1, n, u-n) + f(m, n-1, u)
    prev = [np.ones(1, dtype=object) for _ in range(n2 + 1)]  # m = 0
    for m in range(1, n1 + 1):
        cur = [np.ones(1, dtype=object)]  # n = 0
        for n in range(1, n2 + 1):
            c = np.zeros(m * n + 1, dtype=object)
            a = prev[n]  # (m-1, n), shifted by n
            c[n:n + a.size] += a
            b = cur[n - 1]  # (m, n-1)
            c[:b.size] += b
            cur.append(c)
        prev = cur
    return prev[n2]


def mann_whitney(a, b, mode: str = "auto") -> TestResult:
    """Two-sided Mann-Whitney U test; ``statistic`` is U for sample ``a``.

    ``mode='auto'`` enumerates the exact null distribution when
    ``n1 + n2 <= 20`` and there are no ties, otherwise it uses the normal
    approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 < 1 or n2 < 1:
        raise EmptyGroup("both samples need at least one observation")
    ranks = rankdata(np.r_[a, b])
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    n = n1 + n2
    ties = np.unique(ranks).size != n
    if mode == "auto":
        mode = "exact" if (n <= EXACT_MAX_N and not ties) else "normal"
    if mode == "exact":
        if ties:
            raise ValueError("exact mode requires tie-free samples")
        counts = _u_distribution(n1, n2)
        total = sum(counts)
        k = int(round(u))
        lower = sum(counts[:k + 1])
        upper = sum(counts[k:])
        p = min(1.0, 2.0 * float(min(lower, upper)) / float(total))
        return TestResult(u, p, Method.EXACT, n1, n2)
    if mode != "normal":
        raise ValueError(f"unknown mode {mode!r}")
    _, tcounts = np.unique(ranks, return_counts=True)
    tie_term = float((tcounts ** 3 - tcounts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return TestResult(u, 1.0, Method.NORMAL_APPROX, n1, n2)
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    p = min(1.0, 2.0 * _norm_sf(z))
    return TestResult(u, p, Method.NORMAL_APPROX, n1, n2)


def rank_biserial(u: float, n1: int, n2: int) -> float:
    return 1.0 - 2.0 * u / (n1 * n2)


def bonferroni(alpha: float, m: int) -> float:
    if m < 1:
        raise ValueError("number of tests must be >= 1")
    return alpha / m
