"""Interleave per-second states and utterance events into interval records."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import SpanMismatch
from .model import IndicatorCatalog, IntervalRecord, Modality, RawSession, default_catalog
from .physio import PhysioConfig, PhysioFlags, physio_flags
from .runs import max_run
from .spatial import SpatialConfig, SpatialStateSeries, spatial_states
from .verbal import n_intervals, verbal_presence


@dataclass(frozen=True)
class SyncConfig:
    interval_len: int = 60
    sp_min_run: int = 10  # consecutive seconds, inclusive
    py_min_seconds: float | None = None  # exceeded strictly; default interval_len / 2
    analysis_phases: tuple[int, ...] = (3, 4)

    def __post_init__(self):
        if self.py_min_seconds is None:
            object.__setattr__(self, "py_min_seconds", self.interval_len / 2)
        if not 0 < self.sp_min_run <= self.interval_len:
            raise ValueError("need 0 < sp_min_run <= interval_len")
        if not self.py_min_seconds < self.interval_len:
            raise ValueError("need py_min_seconds < interval_len")


@dataclass(frozen=True)
class IndicatorConfig:
    """Everything needed to turn one RawSession into interval records."""

    sync: SyncConfig = field(default_factory=SyncConfig)
    spatial: SpatialConfig = field(default_factory=SpatialConfig)
    physio: PhysioConfig = field(default_factory=PhysioConfig)


def interleave(session_id: str, spatial: SpatialStateSeries,
               verbal: Mapping[str, Sequence[frozenset[str]]], physio: PhysioFlags,
               cfg: SyncConfig = SyncConfig(), catalog: IndicatorCatalog | None = None
               ) -> list[IntervalRecord]:
    """One record per student per complete interval of the shared span."""
    catalog = catalog or default_catalog()
    if (spatial.start, spatial.n_seconds) != (physio.start, physio.n_seconds):
        raise SpanMismatch(f"spatial span {(spatial.start, spatial.n_seconds)} != "
                           f"physio span {(physio.start, physio.n_seconds)}")
    L = cfg.interval_len
    n = n_intervals((spatial.start, spatial.start + spatial.n_seconds), L)
    students = sorted(spatial.states)
    if sorted(physio.arousal) != students or sorted(verbal) != students:
        raise SpanMismatch("students differ between modalities")
    if any(len(v) != n for v in verbal.values()):
        raise SpanMismatch("verbal presence does not cover the same intervals")
    sp = [e.index for e in catalog.by_modality(Modality.SPATIAL)]
    arousal_j = catalog.lookup("PY.arousal")
    sync_j = catalog.lookup("PY.synchrony")

    records = []
    for sid in students:
        states = spatial.states[sid]
        for k in range(n):
            bits = [0] * len(catalog)
            window = states[k * L:(k + 1) * L]
            for j in sp:
                if max_run(window == j) >= cfg.sp_min_run:
                    bits[j] = 1
            for code in verbal[sid][k]:
                bits[catalog.lookup(code)] = 1
            if physio.arousal[sid][k * L:(k + 1) * L].sum() > cfg.py_min_seconds:
                bits[arousal_j] = 1
            if physio.synchrony[sid][k * L:(k + 1) * L].sum() > cfg.py_min_seconds:
                bits[sync_j] = 1
            records.append(IntervalRecord(session_id, sid, k, tuple(bits)))
    return records


def session_intervals(raw: RawSession, cfg: IndicatorConfig = IndicatorConfig(),
                      catalog: IndicatorCatalog | None = None) -> list[IntervalRecord]:
    """Full indicator derivation for one session."""
    catalog = catalog or default_catalog()
    span = raw.span(cfg.sync.analysis_phases)
    spatial = spatial_states(raw, span, cfg.spatial, catalog)
    verbal, _ = verbal_presence(raw.utterances, raw.students, span, cfg.sync.interval_len)
    physio = physio_flags(raw, span, cfg.physio)
    return interleave(raw.session_id, spatial, verbal, physio, cfg.sync, catalog)


def sort_records(records: Sequence[IntervalRecord]) -> list[IntervalRecord]:
    return sorted(records, key=lambda r: r.key)


def write_intervals(records: Sequence[IntervalRecord], path,
                    catalog: IndicatorCatalog | None = None) -> None:
    """``session_id,student_id,interval_index,<codes...>`` with 0/1 cells."""
    catalog = catalog or default_catalog()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["session_id", "student_id", "interval_index", *catalog.names])
        for r in sort_records(records):
            w.writerow([r.session_id, r.student_id, r.interval_index, *r.values])


def read_intervals(path) -> tuple[list[IntervalRecord], tuple[str, ...]]:
    """Inverse of :func:`write_intervals`; returns records and code names."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["session_id", "student_id", "interval_index"]:
            raise ValueError(f"{path}: not an intervals file")
        codes = tuple(header[3:])
        records = [IntervalRecord(row[0], row[1], int(row[2]), tuple(int(v) for v in row[3:]))
                   for row in reader if row]
    return records, codes


def records_array(records: Sequence[IntervalRecord]) -> np.ndarray:
    return np.array([r.values for r in records], dtype=np.int8).reshape(len(records), -1)
