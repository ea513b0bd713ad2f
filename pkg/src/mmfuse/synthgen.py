"""Synthetic data with known ground truth.

Three generators:

* :func:`sample_indicators` draws interval records from a planted latent
  class model (the four presets mirror the reported class profiles);
* :func:`synth_raw_session` renders a hand-written :class:`ScenarioScript`
  into ingest-format files plus the interval bits the script implies;
* :func:`synth_corpus` builds whole raw sessions in which every
  person-interval acts out one of the four planted classes.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import InconsistentScript
from .model import IndicatorCatalog, IntervalRecord, VB_CODES, default_catalog
from .sync import IndicatorConfig, write_intervals

# -- planted latent class models -------------------------------------------

FIG3_PROFILES: dict[str, tuple[str, ...]] = {
    "Collaborative Communication": (
        "SP.collaborate.primary", "SP.collaborate.secondary", "VB.task.allocation",
        "VB.information.sharing", "VB.information.requesting", "VB.agreement",
        "PY.arousal", "PY.synchrony"),
    "Embodied Collaboration": (
        "SP.collaborate.primary", "SP.collaborate.secondary", "PY.arousal", "PY.synchrony"),
    "Distant Interaction": (
        "SP.individual.primary", "VB.task.allocation", "VB.information.sharing",
        "VB.information.requesting", "VB.agreement", "PY.arousal", "PY.synchrony"),
    "Solitary Engagement": ("SP.individual.secondary", "PY.arousal"),
}
STUDENTS = ("s1", "s2", "s3", "s4")


@dataclass(frozen=True, eq=False)
class PlantedSpec:
    weights: np.ndarray
    item_probs: np.ndarray
    n: int
    seed: int = 0
    n_per_unit: int = 20
    students_per_session: int = 4
    code_names: tuple[str, ...] = ()
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        th = np.asarray(self.item_probs, dtype=float)
        if th.ndim != 2 or w.shape != (th.shape[0],):
            raise ValueError("weights must have one entry per class row of item_probs")
        if abs(w.sum() - 1.0) > 1e-12 or (w < 0).any():
            raise ValueError("weights must be a probability vector")
        if ((th < 0) | (th > 1)).any():
            raise ValueError("item probabilities must lie in [0, 1]")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "item_probs", th)

    @property
    def K(self) -> int:
        return self.item_probs.shape[0]

    def to_dict(self) -> dict:
        return {"K": self.K, "weights": self.weights.tolist(), "item_probs": self.item_probs.tolist(),
                "n": self.n, "seed": self.seed, "n_per_unit": self.n_per_unit,
                "students_per_session": self.students_per_session,
                "code_names": list(self.code_names), "class_names": list(self.class_names)}


def fig3_spec(n: int = 3000, seed: int = 0, present: float = 0.9, absent: float = 0.05,
              catalog: IndicatorCatalog | None = None) -> PlantedSpec:
    """Four equally weighted classes with the reported presence patterns."""
    catalog = catalog or default_catalog()
    theta = np.full((len(FIG3_PROFILES), len(catalog)), absent)
    for k, codes in enumerate(FIG3_PROFILES.values()):
        theta[k, [catalog.lookup(c) for c in codes]] = present
    K = len(FIG3_PROFILES)
    return PlantedSpec(np.full(K, 1.0 / K), theta, n, seed, code_names=catalog.names,
                       class_names=tuple(FIG3_PROFILES))


def fig3_profiles(catalog: IndicatorCatalog | None = None) -> np.ndarray:
    """The four presence patterns as a ``(4, 17)`` 0/1 array."""
    catalog = catalog or default_catalog()
    out = np.zeros((len(FIG3_PROFILES), len(catalog)), dtype=np.int64)
    for k, codes in enumerate(FIG3_PROFILES.values()):
        out[k, [catalog.lookup(c) for c in codes]] = 1
    return out


def sample_matrix(spec: PlantedSpec) -> tuple[np.ndarray, np.ndarray]:
    """``(n, J)`` 0/1 array and true labels."""
    rng = np.random.default_rng(spec.seed)
    z = rng.choice(spec.K, size=spec.n, p=spec.weights)
    Y = (rng.random((spec.n, spec.item_probs.shape[1])) < spec.item_probs[z]).astype(np.int8)
    return Y, z


def sample_indicators(spec: PlantedSpec) -> tuple[list[IntervalRecord], np.ndarray]:
    """Records laid out as sessions of ``students_per_session`` students with
    ``n_per_unit`` consecutive intervals each."""
    Y, z = sample_matrix(spec)
    per_session = spec.n_per_unit * spec.students_per_session
    records = []
    for i, row in enumerate(Y):
        s, rem = divmod(i, per_session)
        st, k = divmod(rem, spec.n_per_unit)
        records.append(IntervalRecord(f"P{s + 1:04d}", f"s{st + 1}", k, tuple(int(v) for v in row)))
    return records, z


# -- scripted raw sessions ---------------------------------------------------

@dataclass
class StudentScript:
    positions: list = field(default_factory=list)  # [t0, t1, x, y]: hold (x, y) for t0 <= t < t1
    heart_rate: list = field(default_factory=list)  # segment dicts, see _hr_value
    utterances: list = field(default_factory=list)  # [t_start, t_end, code]
    survey: tuple = (5, 5)


@dataclass
class ScenarioScript:
    """A time-scripted session, all times in seconds from the start of phase 1."""

    session_id: str
    zones: list
    phases: list
    students: dict
    expected: dict = field(default_factory=dict)  # student -> [[codes present], ...] per interval
    time_offset: float = 0.0  # added to every timestamp written to disk

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScenarioScript":
        students = {sid: StudentScript(s.get("positions", []), s.get("heart_rate", []),
                                       s.get("utterances", []), tuple(s.get("survey", (5, 5))))
                    for sid, s in d["students"].items()}
        return cls(d["session_id"], list(d["zones"]), [tuple(p) for p in d["phases"]], students,
                   dict(d.get("expected", {})), float(d.get("time_offset", 0.0)))

    @classmethod
    def load(cls, path) -> "ScenarioScript":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {"session_id": self.session_id, "zones": self.zones, "phases": [list(p) for p in self.phases],
                "time_offset": self.time_offset,
                "students": {sid: {"positions": s.positions, "heart_rate": s.heart_rate,
                                   "utterances": s.utterances, "survey": list(s.survey)}
                             for sid, s in self.students.items()},
                "expected": self.expected}


def _hr_value(seg: Mapping, t: int) -> float:
    kind = seg.get("kind", "constant")
    if kind == "constant":
        return float(seg["bpm"])
    if kind == "ramp":
        span = max(seg["t1"] - seg["t0"] - 1, 1)
        return float(seg["start"]) + (float(seg["end"]) - float(seg["start"])) * (t - seg["t0"]) / span
    if kind == "sine":
        return float(seg["mean"]) + float(seg["amp"]) * math.sin(
            2 * math.pi * (t - seg.get("t_ref", 0)) / float(seg["period"]) + float(seg.get("phase", 0.0)))
    if kind == "series":
        return float(seg["values"][t - seg["t0"]])
    raise ValueError(f"unknown heart-rate segment kind {kind!r}")


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".") if v != int(v) else str(int(v))


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_script_files(script: ScenarioScript, session_dir) -> Path:
    """Render the six ingest files for ``script`` into ``session_dir``."""
    d = Path(session_dir)
    d.mkdir(parents=True, exist_ok=True)
    off = script.time_offset

    pos_rows, hr_rows, utt_rows, survey_rows = [], [], [], []
    for sid in sorted(script.students):
        s = script.students[sid]
        samples = {}
        for t0, t1, x, y in s.positions:
            for t in range(int(t0), int(t1)):
                samples[t] = (x, y)
        pos_rows += [[sid, _fmt(t + off), _fmt(x), _fmt(y)] for t, (x, y) in sorted(samples.items())]
        hr = {}
        for seg in s.heart_rate:
            for t in range(int(seg["t0"]), int(seg["t1"])):
                hr[t] = _hr_value(seg, t)
        hr_rows += [[sid, _fmt(t + off), _fmt(round(v, 4))] for t, v in sorted(hr.items())]
        utt_rows += [[sid, _fmt(a + off), _fmt(b + off), code] for a, b, code in s.utterances]
        survey_rows.append([sid, s.survey[0], s.survey[1]])

    _write_csv(d / "positions.csv", ["student_id", "t", "x", "y"], pos_rows)
    _write_csv(d / "heartrate.csv", ["student_id", "t", "bpm"], hr_rows)
    utt_rows.sort(key=lambda r: (float(r[1]), r[0], r[3]))
    _write_csv(d / "utterances.csv", ["student_id", "t_start", "t_end", "code"], utt_rows)
    _write_csv(d / "surveys.csv", ["student_id", "task_satisfaction", "collab_satisfaction"], survey_rows)
    (d / "zones.json").write_text(json.dumps(script.zones, indent=2) + "\n", encoding="utf-8")
    phases = [{"phase": i + 1, "start_s": p[0] + off, "end_s": p[1] + off} for i, p in enumerate(script.phases)]
    (d / "phases.json").write_text(json.dumps(phases, indent=2) + "\n", encoding="utf-8")
    return d


def expected_records(script: ScenarioScript, catalog: IndicatorCatalog | None = None) -> list[IntervalRecord]:
    catalog = catalog or default_catalog()
    return [IntervalRecord.from_presence(script.session_id, sid, k, codes, catalog)
            for sid, per in script.expected.items() for k, codes in enumerate(per)]


def synth_raw_session(script: ScenarioScript, out_dir, check: bool = False,
                      cfg: IndicatorConfig = IndicatorConfig(),
                      catalog: IndicatorCatalog | None = None) -> tuple[Path, Path]:
    """Write the session files under ``out_dir/<session_id>`` and the
    expected ``intervals.csv`` next to them.

    With ``check=True`` the files are run through ingest and indicator
    derivation, and :class:`InconsistentScript` is raised when the result
    differs from ``script.expected``.
    """
    catalog = catalog or default_catalog()
    out_dir = Path(out_dir)
    session_dir = write_script_files(script, out_dir / script.session_id)
    expected = expected_records(script, catalog)
    expected_path = out_dir / f"{script.session_id}.expected.csv"
    write_intervals(expected, expected_path, catalog)
    if check:
        from .ingest import load_session
        from .sync import session_intervals, sort_records
        got = sort_records(session_intervals(load_session(session_dir, catalog), cfg, catalog))
        want = sort_records(expected)
        if [(r.key, r.values) for r in got] != [(r.key, r.values) for r in want]:
            bad = next(((g.key, g.present(catalog), w.present(catalog)) for g, w in zip(got, want)
                        if g.values != w.values), (len(got), len(want)))
            raise InconsistentScript(f"{script.session_id}: expected bits contradict the rules: {bad}")
    return session_dir, expected_path


# -- planted raw corpus --------------------------------------------------------

CORPUS_ZONES = [
    {"name": "Bed1", "cx": 2.0, "cy": 2.0, "radius": 1.5, "task_type": "secondary"},
    {"name": "Bed2", "cx": 2.0, "cy": 6.0, "radius": 1.5, "task_type": "secondary"},
    {"name": "Bed3", "cx": 8.0, "cy": 6.0, "radius": 1.5, "task_type": "distraction"},
    {"name": "Bed4", "cx": 8.0, "cy": 2.0, "radius": 1.5, "task_type": "primary"},
]
_PRIMARY = (8.0, 2.0)
_SECONDARY = (2.0, 2.0)
_SOLO_SECONDARY = (2.0, 6.0)
_CLUSTER = ((-0.2, -0.2), (0.2, -0.2), (-0.2, 0.2), (0.2, 0.2))
_RING = ((1.4, 0.0), (0.0, 1.4), (-1.4, 0.0), (0.0, -1.4))
_IDLE = ((4.0, 4.0), (6.0, 4.0), (4.0, 8.0), (6.0, 8.0))
_CLASS_VB = ("VB.task.allocation", "VB.information.sharing", "VB.information.requesting", "VB.agreement")
CC, EC, DI, SE = range(4)


def _draw_classes(rng) -> list[int]:
    # collaboration needs a partner; at most one solitary student keeps the
    # synchrony sign of everyone else positive
    while True:
        c = [int(v) for v in rng.integers(0, 4, size=4)]
        n_collab = sum(v in (CC, EC) for v in c)
        if n_collab != 1 and c.count(SE) <= 1:
            return c


def corpus_script(session_id: str, rng, n_intervals: int = 20, noise: float = 0.05,
                  present: float = 0.9, interval_len: int = 60) -> tuple[ScenarioScript, dict]:
    """One planted session and its per-interval true class labels."""
    p1, p2 = (0, 120), (120, 240)
    half = n_intervals // 2
    p3 = (240, 240 + half * interval_len)
    p4 = (p3[1], 240 + n_intervals * interval_len)
    students = {sid: StudentScript() for sid in STUDENTS}
    labels = {sid: [] for sid in STUDENTS}
    expected = {sid: [] for sid in STUDENTS}
    phase_shift = 0.0
    for i, sid in enumerate(STUDENTS):
        s = students[sid]
        s.positions.append([0, p3[0], *_IDLE[i]])
        s.heart_rate.append({"t0": 0, "t1": p1[1], "kind": "series",
                             "values": list(np.round(72 + rng.normal(0, 1, p1[1]), 2))})
        s.heart_rate.append({"t0": p2[0], "t1": p2[1], "kind": "series",
                             "values": list(np.round(80 + rng.normal(0, 1, p2[1] - p2[0]), 2))})
    for k in range(n_intervals):
        t0 = p3[0] + k * interval_len
        mid, t1 = t0 + interval_len // 2, t0 + interval_len
        classes = _draw_classes(rng)
        drive = 2 * np.pi * np.arange(t0, t1) / 20.0 + phase_shift
        phase_shift += rng.uniform(0, 2 * np.pi)
        ring = iter(_RING)
        for i, (sid, c) in enumerate(zip(STUDENTS, classes)):
            s = students[sid]
            labels[sid].append(c)
            codes = []
            if c in (CC, EC):
                dx, dy = _CLUSTER[i]
                s.positions.append([t0, mid, _PRIMARY[0] + dx, _PRIMARY[1] + dy])
                s.positions.append([mid, t1, _SECONDARY[0] + dx, _SECONDARY[1] + dy])
                codes += ["SP.collaborate.primary", "SP.collaborate.secondary"]
            elif c == DI:
                dx, dy = next(ring)
                s.positions.append([t0, t1, _PRIMARY[0] + dx, _PRIMARY[1] + dy])
                codes.append("SP.individual.primary")
            else:
                s.positions.append([t0, t1, _SOLO_SECONDARY[0] + 1.0, _SOLO_SECONDARY[1]])
                codes.append("SP.individual.secondary")
            for code in VB_CODES:
                p = present if (c in (CC, DI) and code in _CLASS_VB) else noise
                if rng.random() < p:
                    start = int(rng.integers(t0, t1 - 2))
                    s.utterances.append([start, start + int(rng.integers(1, 5)), code])
                    codes.append(code)
            sign = -1.0 if c == SE else 1.0
            hr = 95 + sign * 6 * np.sin(drive) + rng.normal(0, 0.5, interval_len)
            s.heart_rate.append({"t0": t0, "t1": t1, "kind": "series", "values": list(np.round(hr, 2))})
            codes.append("PY.arousal")
            if c != SE:
                codes.append("PY.synchrony")
            expected[sid].append(codes)
    for sid in STUDENTS:
        students[sid].survey = (int(rng.integers(1, 8)), int(rng.integers(1, 8)))
    script = ScenarioScript(session_id, CORPUS_ZONES, [p1, p2, p3, p4], students, expected)
    return script, labels


def synth_corpus(out_dir, n_sessions: int = 8, seed: int = 0, n_intervals: int = 20,
                 noise: float = 0.05) -> tuple[list[Path], Path]:
    """Planted four-class raw sessions; returns session dirs and a labels CSV.

    Ratings are redrawn until both satisfaction groups are non-empty for both
    measures.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    while True:
        scripts = [corpus_script(f"S{i + 1:02d}", rng, n_intervals, noise) for i in range(n_sessions)]
        ratings = [s.survey for sc, _ in scripts for s in sc.students.values()]
        if all(min(r[m] for r in ratings) < 4 <= max(r[m] for r in ratings) for m in (0, 1)):
            break
    dirs, label_rows = [], []
    for script, labels in scripts:
        d, _ = synth_raw_session(script, out_dir)
        dirs.append(d)
        for sid, per in labels.items():
            label_rows += [[script.session_id, sid, k, c] for k, c in enumerate(per)]
    labels_path = out_dir / "labels.csv"
    _write_csv(labels_path, ["session_id", "student_id", "interval_index", "true_class"], label_rows)
    return dirs, labels_path


# -- two-group adjacency data ---------------------------------------------------

def two_group_adjacency(n_a: int = 23, n_b: int = 33, dim: int = 136, shift_sd: float = 1.0,
                        seed: int = 0, base: tuple[float, float] = (2.0, 4.0), noise: float = 0.5
                        ) -> tuple[dict, dict, np.ndarray]:
    """Non-negative adjacency vectors with a planted group-mean shift.

    Group A (Unsatisfied) is shifted along a random unit direction by
    ``shift_sd`` noise standard deviations. Returns (vectors by unit id,
    ratings by unit id, the planted direction).
    """
    rng = np.random.default_rng(seed)
    mu = rng.uniform(*base, size=dim)
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    vectors, ratings = {}, {}
    for i in range(n_a + n_b):
        in_a = i < n_a
        v = mu + rng.normal(0, noise, size=dim) + (shift_sd * noise * direction if in_a else 0.0)
        uid = f"u{i + 1:03d}"
        vectors[uid] = np.clip(v, 0.0, None)
        ratings[uid] = int(rng.integers(1, 4)) if in_a else int(rng.integers(4, 8))
    return vectors, ratings, direction
