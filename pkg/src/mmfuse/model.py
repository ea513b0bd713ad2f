"""Shared domain types and the canonical indicator catalog.

Every downstream stage indexes indicator vectors through
:func:`default_catalog`, so the position of a code in a vector is stable
across runs and files.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class Modality(str, Enum):
    SPATIAL = "Spatial"
    VERBAL = "Verbal"
    PHYSIOLOGICAL = "Physiological"


class TaskType(str, Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    DISTRACTION = "distraction"


class Measure(str, Enum):
    TASK = "task"
    COLLAB = "collab"


class Outcome(str, Enum):
    SATISFIED = "Satisfied"
    UNSATISFIED = "Unsatisfied"


SP_CODES = (
    "SP.collaborate.primary",
    "SP.individual.primary",
    "SP.collaborate.secondary",
    "SP.individual.secondary",
    "SP.collaborate.distraction",
    "SP.individual.distraction",
    "SP.task.distribution",
    "SP.task.transition",
)
VB_CODES = (
    "VB.task.allocation",
    "VB.handover.provision",
    "VB.escalation",
    "VB.information.sharing",
    "VB.information.requesting",
    "VB.responding.to.requests",
    "VB.agreement",
)
PY_CODES = ("PY.arousal", "PY.synchrony")


@dataclass(frozen=True)
class Indicator:
    name: str
    modality: Modality
    index: int


@dataclass(frozen=True)
class IndicatorCatalog:
    """Ordered registry of monomodal codes."""

    entries: tuple[Indicator, ...]
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("indicator code names must be unique")
        if [e.index for e in self.entries] != list(range(len(self.entries))):
            raise ValueError("indicator indices must be contiguous from 0 in declaration order")
        object.__setattr__(self, "_lookup", {e.name: e for e in self.entries})

    @classmethod
    def from_codes(cls, codes: Iterable[tuple[str, Modality | str]]) -> "IndicatorCatalog":
        return cls(tuple(Indicator(name, Modality(mod), i) for i, (name, mod) in enumerate(codes)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Indicator]:
        return iter(self.entries)

    def __contains__(self, name) -> bool:
        return name in self._lookup

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def lookup(self, name: str) -> int:
        """Index of ``name`` in the catalog; ``KeyError`` if absent."""
        return self._lookup[name].index

    def by_modality(self, modality: Modality | str) -> tuple[Indicator, ...]:
        modality = Modality(modality)
        return tuple(e for e in self.entries if e.modality is modality)

    def to_dict(self) -> list[dict]:
        return [{"name": e.name, "modality": e.modality.value, "index": e.index} for e in self.entries]

    @classmethod
    def from_dict(cls, data: Sequence[Mapping]) -> "IndicatorCatalog":
        entries = sorted(data, key=lambda d: d["index"])
        return cls.from_codes((d["name"], d["modality"]) for d in entries)


def default_catalog() -> IndicatorCatalog:
    """The 17 codes: 8 spatial, 7 verbal, 2 physiological, in that order."""
    return IndicatorCatalog.from_codes(
        [(c, Modality.SPATIAL) for c in SP_CODES]
        + [(c, Modality.VERBAL) for c in VB_CODES]
        + [(c, Modality.PHYSIOLOGICAL) for c in PY_CODES]
    )


@dataclass(frozen=True)
class IntervalRecord:
    """One person in one fixed-length window, as a bit vector over the catalog."""

    session_id: str
    student_id: str
    interval_index: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.interval_index < 0:
            raise ValueError("interval_index must be non-negative")
        values = tuple(int(v) for v in self.values)
        if any(v not in (0, 1) for v in values):
            raise ValueError("indicator values must be 0 or 1")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_presence(cls, session_id: str, student_id: str, interval_index: int,
                      present: Iterable[str], catalog: IndicatorCatalog | None = None) -> "IntervalRecord":
        catalog = catalog or default_catalog()
        bits = [0] * len(catalog)
        for name in present:
            bits[catalog.lookup(name)] = 1
        return cls(session_id, student_id, interval_index, tuple(bits))

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.session_id, self.student_id, self.interval_index)

    @property
    def unit(self) -> tuple[str, str]:
        return (self.session_id, self.student_id)

    def present(self, catalog: IndicatorCatalog | None = None) -> list[str]:
        catalog = catalog or default_catalog()
        return [catalog.names[j] for j, v in enumerate(self.values) if v]


def records_matrix(records: Sequence[IntervalRecord]) -> np.ndarray:
    """Stack record bit vectors into an ``(n, J)`` float array."""
    if not records:
        return np.zeros((0, 0))
    return np.array([r.values for r in records], dtype=float)


def check_records(records: Sequence[IntervalRecord]) -> None:
    """Raise ``ValueError`` on duplicate keys or non-contiguous interval indices."""
    seen: dict[tuple[str, str], list[int]] = {}
    keys = set()
    for r in records:
        if r.key in keys:
            raise ValueError(f"duplicate interval record {r.key}")
        keys.add(r.key)
        seen.setdefault(r.unit, []).append(r.interval_index)
    for unit, idx in seen.items():
        if sorted(idx) != list(range(len(idx))):
            raise ValueError(f"interval indices for {unit} are not contiguous from 0")


@dataclass(frozen=True)
class ZoneSpec:
    name: str
    centroid: tuple[float, float]
    radius: float = 1.5
    task_type: TaskType = TaskType.PRIMARY

    def __post_init__(self):
        object.__setattr__(self, "task_type", TaskType(self.task_type))
        object.__setattr__(self, "centroid", (float(self.centroid[0]), float(self.centroid[1])))
        if not self.radius > 0:
            raise ValueError(f"zone {self.name!r}: radius must be positive")


def _frozen(a, dtype) -> np.ndarray:
    a = np.asarray(a, dtype=dtype).copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PositionSeries:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t, np.int64))
        object.__setattr__(self, "x", _frozen(self.x, float))
        object.__setattr__(self, "y", _frozen(self.y, float))

    def __eq__(self, other):
        return (isinstance(other, PositionSeries) and np.array_equal(self.t, other.t)
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))


@dataclass(frozen=True, eq=False)
class HeartRateSeries:
    t: np.ndarray
    bpm: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", _frozen(self.t, np.int64))
        object.__setattr__(self, "bpm", _frozen(self.bpm, float))

    def __eq__(self, other):
        return (isinstance(other, HeartRateSeries) and np.array_equal(self.t, other.t)
                and np.array_equal(self.bpm, other.bpm))


@dataclass(frozen=True)
class Utterance:
    student_id: str
    t_start: int
    t_end: int
    code: str


@dataclass(frozen=True)
class Survey:
    task_satisfaction: int
    collab_satisfaction: int

    def rating(self, measure: Measure | str) -> int:
        return self.task_satisfaction if Measure(measure) is Measure.TASK else self.collab_satisfaction


@dataclass(frozen=True)
class RawSession:
    """Parsed streams for one simulation session, timestamps in whole seconds
    from the start of phase 1."""

    session_id: str
    positions: Mapping[str, PositionSeries]
    utterances: tuple[Utterance, ...]
    heart_rate: Mapping[str, HeartRateSeries]
    zones: tuple[ZoneSpec, ...]
    phase_bounds: tuple[tuple[int, int], ...]
    surveys: Mapping[str, Survey]

    @property
    def students(self) -> tuple[str, ...]:
        ids = set(self.positions) | set(self.heart_rate) | set(self.surveys)
        ids |= {u.student_id for u in self.utterances}
        return tuple(sorted(ids))

    def phase(self, number: int) -> tuple[int, int]:
        """Bounds of phase ``number`` (1-based) as a half-open ``(start, end)``."""
        return self.phase_bounds[number - 1]

    def span(self, phases: Sequence[int] = (3, 4)) -> tuple[int, int]:
        """Half-open analysis span from the first listed phase start to the last phase end."""
        return (self.phase(min(phases))[0], self.phase(max(phases))[1])

    @property
    def timeline(self) -> tuple[int, int]:
        return (self.phase_bounds[0][0], self.phase_bounds[-1][1])


@dataclass(frozen=True)
class OutcomeGroups:
    measure: Measure
    membership: Mapping[object, Outcome]
    threshold: int = 4

    @classmethod
    def from_ratings(cls, ratings: Mapping[object, int], measure: Measure | str,
                     threshold: int = 4) -> "OutcomeGroups":
        membership = {unit: Outcome.SATISFIED if r >= threshold else Outcome.UNSATISFIED
                      for unit, r in ratings.items()}
        return cls(Measure(measure), membership, threshold)

    @classmethod
    def from_surveys(cls, surveys: Mapping[object, Survey], measure: Measure | str,
                     threshold: int = 4) -> "OutcomeGroups":
        return cls.from_ratings({u: s.rating(measure) for u, s in surveys.items()}, measure, threshold)

    def members(self, outcome: Outcome) -> list:
        return [u for u, o in self.membership.items() if o is outcome]
