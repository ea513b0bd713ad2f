"""Per-second spatial (SP) states from 1 Hz positions."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .model import IndicatorCatalog, PositionSeries, RawSession, ZoneSpec, default_catalog
from .runs import in_long_run

NONE_STATE = -1


@dataclass(frozen=True)
class SpatialConfig:
    collab_distance: float = 1.0  # metres, inclusive
    collab_min_run: int = 11  # seconds; "more than 10"


@dataclass(frozen=True)
class SpatialStateSeries:
    """SP state per student per second of ``[start, start + n_seconds)``.

    States are catalog indices, or ``NONE_STATE`` for a missing sample.
    """

    start: int
    n_seconds: int
    states: Mapping[str, np.ndarray]
    catalog: IndicatorCatalog

    def names(self, student: str) -> list[str | None]:
        return [None if s == NONE_STATE else self.catalog.names[s] for s in self.states[student]]


def assign_zone(point, zones: Sequence[ZoneSpec]) -> str | None:
    """Zone containing ``point``; overlaps go to the nearest centroid, exact
    ties to the first zone listed."""
    x, y = point
    best, best_d = None, np.inf
    for z in zones:
        d = float(np.hypot(x - z.centroid[0], y - z.centroid[1]))
        if d <= z.radius and d < best_d:
            best, best_d = z.name, d
    return best


def _zone_index(x: np.ndarray, y: np.ndarray, zones: Sequence[ZoneSpec]) -> np.ndarray:
    """Vectorised assign_zone: index into ``zones`` or -1."""
    out = np.full(x.shape, -1, dtype=np.int64)
    best = np.full(x.shape, np.inf)
    for i, z in enumerate(zones):
        d = np.hypot(x - z.centroid[0], y - z.centroid[1])
        take = (d <= z.radius) & (d < best)
        out[take] = i
        best[take] = d[take]
    return out


def position_grid(positions: Mapping[str, PositionSeries], students: Sequence[str],
                  t0: int, t1: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense (students x seconds) x/y arrays with a validity mask."""
    n = t1 - t0
    X = np.full((len(students), n), np.nan)
    Y = np.full((len(students), n), np.nan)
    for i, sid in enumerate(students):
        s = positions.get(sid)
        if s is None:
            continue
        keep = (s.t >= t0) & (s.t < t1)
        X[i, s.t[keep] - t0] = s.x[keep]
        Y[i, s.t[keep] - t0] = s.y[keep]
    return X, Y, np.isfinite(X) & np.isfinite(Y)


def pair_flags(X: np.ndarray, Y: np.ndarray, valid: np.ndarray,
               cfg: SpatialConfig = SpatialConfig()) -> dict[tuple[int, int], np.ndarray]:
    """Per unordered student pair: True where the pair sits in a sustained
    proximity run."""
    out = {}
    with np.errstate(invalid="ignore"):
        for i, j in combinations(range(X.shape[0]), 2):
            near = valid[i] & valid[j] & (np.hypot(X[i] - X[j], Y[i] - Y[j]) <= cfg.collab_distance)
            out[(i, j)] = in_long_run(near, cfg.collab_min_run)
    return out


def collaboration_flags(positions: Mapping[str, PositionSeries], t0: int, t1: int,
                        cfg: SpatialConfig = SpatialConfig()) -> dict[str, np.ndarray]:
    """Per student, per second of ``[t0, t1)``: True iff some partner is
    within ``collab_distance`` during a run longer than 10 s."""
    students = sorted(positions)
    X, Y, valid = position_grid(positions, students, t0, t1)
    flags = {sid: np.zeros(t1 - t0, dtype=bool) for sid in students}
    for (i, j), f in pair_flags(X, Y, valid, cfg).items():
        flags[students[i]] |= f
        flags[students[j]] |= f
    return flags


def spatial_states(raw: RawSession, span: tuple[int, int] | None = None,
                   cfg: SpatialConfig = SpatialConfig(),
                   catalog: IndicatorCatalog | None = None) -> SpatialStateSeries:
    """SP state per second over ``span`` (default: phases 3-4).

    Proximity runs are measured over the whole session timeline, so a run
    that starts before the span still counts inside it.
    """
    catalog = catalog or default_catalog()
    span = span or raw.span()
    t0, t1 = raw.timeline
    t0, t1 = min(t0, span[0]), max(t1, span[1])
    students = raw.students
    X, Y, valid = position_grid(raw.positions, students, t0, t1)
    collab = np.zeros(valid.shape, dtype=bool)
    for (i, j), f in pair_flags(X, Y, valid, cfg).items():
        collab[i] |= f
        collab[j] |= f

    zone_state = {}
    for z_i, z in enumerate(raw.zones):
        kind = z.task_type.value
        zone_state[z_i] = (catalog.lookup(f"SP.collaborate.{kind}"), catalog.lookup(f"SP.individual.{kind}"))
    distribution = catalog.lookup("SP.task.distribution")
    transition = catalog.lookup("SP.task.transition")

    a, b = span[0] - t0, span[1] - t0
    states = {}
    for i, sid in enumerate(students):
        zi = _zone_index(np.nan_to_num(X[i, a:b], nan=np.inf), np.nan_to_num(Y[i, a:b], nan=np.inf), raw.zones)
        c = collab[i, a:b]
        st = np.where(c, distribution, transition).astype(np.int64)
        for z_i, (sc, si) in zone_state.items():
            in_z = zi == z_i
            st[in_z & c] = sc
            st[in_z & ~c] = si
        st[~valid[i, a:b]] = NONE_STATE
        st.setflags(write=False)
        states[sid] = st
    return SpatialStateSeries(span[0], span[1] - span[0], states, catalog)


def write_spatial_states(series: SpatialStateSeries, path) -> None:
    """Debug dump: ``student_id,t,state`` (empty state for missing seconds)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["student_id", "t", "state"])
        for sid in sorted(series.states):
            for k, name in enumerate(series.names(sid)):
                w.writerow([sid, series.start + k, name or ""])
