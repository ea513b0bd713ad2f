"""Parse and validate raw session directories.

A session directory holds six files::

    positions.csv    student_id,t,x,y
    utterances.csv   student_id,t_start,t_end,code
    heartrate.csv    student_id,t,bpm
    zones.json       [{name, cx, cy, radius, task_type}, ...]
    phases.json      [{phase, start_s, end_s}, ...]   (exactly 4)
    surveys.csv      student_id,task_satisfaction,collab_satisfaction

All timestamps are floored to whole seconds and rebased so that the start
of phase 1 is t = 0.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (MalformedRow, MissingFile, NonMonotoneTimestamp, UnknownCode,
                     WrongStudentCount)
from .model import (HeartRateSeries, IndicatorCatalog, Modality, PositionSeries, RawSession,
                    Survey, TaskType, Utterance, ZoneSpec, default_catalog)

STUDENTS_PER_SESSION = 4
N_PHASES = 4
HR_RANGE = (25.0, 240.0)
MIN_BASELINE_SAMPLES = 30

FILES = {
    "positions": ("positions.csv", ("student_id", "t", "x", "y")),
    "utterances": ("utterances.csv", ("student_id", "t_start", "t_end", "code")),
    "heartrate": ("heartrate.csv", ("student_id", "t", "bpm")),
    "surveys": ("surveys.csv", ("student_id", "task_satisfaction", "collab_satisfaction")),
}
ZONES_FILE = "zones.json"
PHASES_FILE = "phases.json"

REPORT_LEGEND = {
    "Gap": "a 1 Hz stream is missing samples inside the session timeline (not interpolated)",
    "OutOfPhysiologicalRange": f"heart-rate sample outside [{HR_RANGE[0]:g}, {HR_RANGE[1]:g}] bpm",
    "UtteranceOutsidePhases": "utterance starts outside the union of the four phases",
    "MissingSurvey": "student has no survey row and is left out of outcome groups",
    "PhaseOrder": "phase windows must be non-empty, ordered and non-overlapping",
    "InsufficientBaseline": f"fewer than {MIN_BASELINE_SAMPLES} phase-1 heart-rate samples",
}


def _read_csv(path: Path, header: tuple[str, ...]):
    if not path.is_file():
        raise MissingFile(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise MalformedRow(path.name, 0, "empty file (header expected)") from None
        if tuple(h.strip() for h in got) != header:
            raise MalformedRow(path.name, 0, f"expected header {','.join(header)}")
        for i, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(path.name, i, f"expected {len(header)} fields, got {len(row)}")
            yield i, [c.strip() for c in row]


def _num(value: str, file: str, row: int) -> float:
    try:
        v = float(value)
    except ValueError:
        raise MalformedRow(file, row, f"not a number: {value!r}") from None
    if not math.isfinite(v):
        raise MalformedRow(file, row, f"non-finite value: {value!r}")
    return v


def _int(value: str, file: str, row: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise MalformedRow(file, row, f"not an integer: {value!r}") from None


def _read_json(path: Path):
    if not path.is_file():
        raise MissingFile(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedRow(path.name, exc.lineno, exc.msg) from None


def _load_phases(path: Path) -> list[tuple[float, float]]:
    data = _read_json(path)
    if not isinstance(data, list) or len(data) != N_PHASES:
        raise MalformedRow(path.name, 0, f"expected an array of {N_PHASES} phases")
    phases = {}
    for i, item in enumerate(data):
        try:
            number = int(item["phase"])
            phases[number] = (float(item["start_s"]), float(item["end_s"]))
        except (KeyError, TypeError, ValueError):
            raise MalformedRow(path.name, i, "phase entries need integer phase, start_s, end_s") from None
    if sorted(phases) != list(range(1, N_PHASES + 1)):
        raise MalformedRow(path.name, 0, "phases must be numbered 1..4")
    return [phases[k] for k in range(1, N_PHASES + 1)]


def _load_zones(path: Path) -> tuple[ZoneSpec, ...]:
    data = _read_json(path)
    if not isinstance(data, list) or not data:
        raise MalformedRow(path.name, 0, "expected a non-empty array of zones")
    zones = []
    for i, item in enumerate(data):
        try:
            zones.append(ZoneSpec(str(item["name"]), (float(item["cx"]), float(item["cy"])),
                                  float(item.get("radius", 1.5)), TaskType(item["task_type"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRow(path.name, i, f"invalid zone: {exc}") from None
    names = [z.name for z in zones]
    if len(set(names)) != len(names):
        raise MalformedRow(path.name, 0, "zone names must be unique")
    return tuple(zones)


def load_session(session_dir, catalog: IndicatorCatalog | None = None) -> RawSession:
    """Parse one session directory into a :class:`RawSession`."""
    session_dir = Path(session_dir)
    catalog = catalog or default_catalog()
    verbal = {e.name for e in catalog.by_modality(Modality.VERBAL)}
    for name, header in FILES.values():
        if not (session_dir / name).is_file():
            raise MissingFile(session_dir / name)
    for name in (ZONES_FILE, PHASES_FILE):
        if not (session_dir / name).is_file():
            raise MissingFile(session_dir / name)

    phases_raw = _load_phases(session_dir / PHASES_FILE)
    origin = math.floor(phases_raw[0][0])
    phase_bounds = tuple((math.floor(s) - origin, math.floor(e) - origin) for s, e in phases_raw)
    zones = _load_zones(session_dir / ZONES_FILE)

    def rebase(v: float) -> int:
        return math.floor(v) - origin

    fname, header = FILES["positions"]
    pos: dict[str, list] = {}
    for row, (sid, t, x, y) in _read_csv(session_dir / fname, header):
        pos.setdefault(sid, []).append((rebase(_num(t, fname, row)), _num(x, fname, row), _num(y, fname, row)))

    fname, header = FILES["heartrate"]
    hr: dict[str, list] = {}
    for row, (sid, t, bpm) in _read_csv(session_dir / fname, header):
        hr.setdefault(sid, []).append((rebase(_num(t, fname, row)), _num(bpm, fname, row)))

    fname, header = FILES["utterances"]
    utterances = []
    for row, (sid, t0, t1, code) in _read_csv(session_dir / fname, header):
        if code not in verbal:
            raise UnknownCode(code, fname, row)
        a, b = rebase(_num(t0, fname, row)), rebase(_num(t1, fname, row))
        if a > b:
            raise MalformedRow(fname, row, "t_start after t_end")
        utterances.append(Utterance(sid, a, b, code))
    utterances.sort(key=lambda u: (u.t_start, u.t_end, u.student_id, u.code))

    fname, header = FILES["surveys"]
    surveys = {}
    for row, (sid, task, collab) in _read_csv(session_dir / fname, header):
        ts, cs = _int(task, fname, row), _int(collab, fname, row)
        if not (1 <= ts <= 7 and 1 <= cs <= 7):
            raise MalformedRow(fname, row, "Likert ratings must lie in 1..7")
        if sid in surveys:
            raise MalformedRow(fname, row, f"duplicate survey for {sid!r}")
        surveys[sid] = Survey(ts, cs)

    positions = {}
    for sid, rows in pos.items():
        t = np.array([r[0] for r in rows], dtype=np.int64)
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise NonMonotoneTimestamp(sid, int(t[bad[0] + 1]), FILES["positions"][0])
        positions[sid] = PositionSeries(t, [r[1] for r in rows], [r[2] for r in rows])
    heart_rate = {}
    for sid, rows in hr.items():
        t = np.array([r[0] for r in rows], dtype=np.int64)
        bad = np.flatnonzero(np.diff(t) <= 0)
        if bad.size:
            raise NonMonotoneTimestamp(sid, int(t[bad[0] + 1]), FILES["heartrate"][0])
        heart_rate[sid] = HeartRateSeries(t, [r[1] for r in rows])

    raw = RawSession(session_dir.name, positions, tuple(utterances), heart_rate, zones,
                     phase_bounds, surveys)
    if len(raw.students) != STUDENTS_PER_SESSION:
        raise WrongStudentCount(len(raw.students))
    return raw


@dataclass(frozen=True)
class Finding:
    file: str
    row: int | None
    message: str
    kind: str = ""


@dataclass
class ValidationReport:
    session_id: str
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)
    coverage: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        def rows(items):
            return [{"file": f.file, "row": f.row, "kind": f.kind, "message": f.message} for f in items]
        return {"session_id": self.session_id, "ok": self.ok, "errors": rows(self.errors),
                "warnings": rows(self.warnings), "coverage": self.coverage,
                "legend": REPORT_LEGEND}


def validate(raw: RawSession) -> ValidationReport:
    """Structural checks (errors) and data-quality checks (warnings)."""
    report = ValidationReport(raw.session_id)

    prev_end = None
    for i, (s, e) in enumerate(raw.phase_bounds, start=1):
        if e <= s:
            report.errors.append(Finding(PHASES_FILE, i - 1, f"phase {i} is empty or reversed", "PhaseOrder"))
        if prev_end is not None and s < prev_end:
            report.errors.append(Finding(PHASES_FILE, i - 1, f"phase {i} overlaps phase {i - 1}", "PhaseOrder"))
        prev_end = e if prev_end is None else max(prev_end, e)

    t0, t1 = raw.timeline
    expected = max(t1 - t0, 0)
    for stream, fname, data in (("positions", FILES["positions"][0], raw.positions),
                                ("heartrate", FILES["heartrate"][0], raw.heart_rate)):
        cov = {}
        for sid in raw.students:
            series = data.get(sid)
            inside = 0 if series is None else int(((series.t >= t0) & (series.t < t1)).sum())
            cov[sid] = inside / expected if expected else 0.0
            if inside < expected:
                report.warnings.append(Finding(fname, None, f"student {sid}: {expected - inside} of "
                                               f"{expected} 1 Hz samples missing", "Gap"))
        report.coverage[stream] = cov

    lo, hi = HR_RANGE
    for sid in raw.students:
        series = raw.heart_rate.get(sid)
        if series is None:
            continue
        for t, v in zip(series.t[(series.bpm < lo) | (series.bpm > hi)],
                        series.bpm[(series.bpm < lo) | (series.bpm > hi)]):
            report.warnings.append(Finding(FILES["heartrate"][0], None,
                                           f"student {sid}: {v:g} bpm at t={int(t)}",
                                           "OutOfPhysiologicalRange"))
        p1s, p1e = raw.phase(1)
        n_base = int(((series.t >= p1s) & (series.t < p1e)).sum())
        if n_base < MIN_BASELINE_SAMPLES:
            report.errors.append(Finding(FILES["heartrate"][0], None,
                                         f"student {sid}: {n_base} phase-1 samples", "InsufficientBaseline"))
    for sid in raw.students:
        if sid not in raw.heart_rate:
            report.errors.append(Finding(FILES["heartrate"][0], None, f"student {sid}: no heart-rate data",
                                         "InsufficientBaseline"))

    for u in raw.utterances:
        if not any(s <= u.t_start < e for s, e in raw.phase_bounds):
            report.warnings.append(Finding(FILES["utterances"][0], None,
                                           f"student {u.student_id}: {u.code} at t={u.t_start}",
                                           "UtteranceOutsidePhases"))
    for sid in raw.students:
        if sid not in raw.surveys:
            report.warnings.append(Finding(FILES["surveys"][0], None, f"student {sid}: no survey",
                                           "MissingSurvey"))
    return report
