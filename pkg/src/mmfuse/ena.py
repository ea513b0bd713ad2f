"""Epistemic network analysis: code co-occurrence accumulation, means
rotation and group comparison.

Units are students, lines are intervals in temporal order, and by default
the stanza is the whole conversation (every earlier line is context).
Group A is Unsatisfied and group B Satisfied, so MR1 points from the
Satisfied mean towards the Unsatisfied mean.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import statkit
from .errors import DegenerateProjection, GroupTooSmall, IdenticalGroupMeans
from .model import Outcome, OutcomeGroups

log = logging.getLogger(__name__)

GROUP_A = Outcome.UNSATISFIED
GROUP_B = Outcome.SATISFIED


@dataclass(frozen=True)
class Window:
    """Finite stanza: the current line plus ``lines - 1`` earlier lines."""

    lines: int

    def __post_init__(self):
        if self.lines < 1:
            raise ValueError("window must hold at least one line")


WHOLE = "whole"


@dataclass(frozen=True, eq=False)
class AdjacencyVector:
    unit_id: object
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class EnaSpace:
    unit_ids: tuple
    grand_mean: np.ndarray
    axes: np.ndarray  # (n_axes, D), MR1 first
    axis_names: tuple[str, ...]
    variance_explained: np.ndarray
    unit_scores: np.ndarray  # (n_units, n_axes)
    total_variance: float

    def scores(self, axis: str) -> np.ndarray:
        return self.unit_scores[:, self.axis_names.index(axis)]


@dataclass(frozen=True)
class GroupComparison:
    axis: str
    U: float  # statistic for group A
    U_other: float  # statistic for group B
    p: float
    r: float  # rank-biserial, 1 - 2U/(n1 n2)
    method: str
    n_a: int
    n_b: int
    median_a: float
    median_b: float
    alpha_adjusted: float

    @property
    def significant(self) -> bool:
        return self.p < self.alpha_adjusted


def pair_index(n_codes: int) -> list[tuple[int, int]]:
    """Unordered code pairs ``(i, j)``, ``i < j``, in row-major order."""
    return [(i, j) for i in range(n_codes) for j in range(i + 1, n_codes)]


def accumulate(lines, stanza=WHOLE) -> np.ndarray:
    """Binary-summation co-occurrence weights for one unit.

    ``lines`` is a ``(T, C)`` 0/1 array in temporal order. For each line,
    pair ``(i, j)`` gains 1 when one code is in the line and the other is in
    its context (the line itself plus earlier lines of the stanza).
    """
    L = np.asarray(lines, dtype=bool)
    if L.ndim != 2:
        raise ValueError("lines must be a (T, C) array")
    T, C = L.shape
    if stanza == WHOLE:
        ctx = np.logical_or.accumulate(L, axis=0) if T else L
    elif isinstance(stanza, Window):
        counts = np.cumsum(L, axis=0, dtype=np.int64)
        lagged = np.zeros_like(counts)
        if stanza.lines < T:
            lagged[stanza.lines:] = counts[:-stanza.lines]
        ctx = (counts - lagged) > 0
    else:
        raise ValueError(f"unknown stanza {stanza!r}")
    iu, ju = np.triu_indices(C, k=1)
    hit = (L[:, iu] & ctx[:, ju]) | (L[:, ju] & ctx[:, iu])
    return hit.sum(axis=0).astype(float)


def accumulate_units(lines_by_unit: Mapping[object, np.ndarray], stanza=WHOLE) -> list[AdjacencyVector]:
    """Adjacency vector per unit; units with no lines are skipped with a warning."""
    out = []
    for unit, lines in lines_by_unit.items():
        if len(lines) == 0:
            log.warning("unit %s has no lines and is excluded", unit)
            continue
        out.append(AdjacencyVector(unit, accumulate(lines, stanza)))
    return out


def normalize_and_center(vectors: Sequence[AdjacencyVector]
                         ) -> tuple[list[AdjacencyVector], np.ndarray, np.ndarray]:
    """Scale each vector to unit length and subtract the grand mean.

    Zero vectors are dropped with a warning. Returns (normalised vectors,
    centred matrix aligned with them, grand mean).
    """
    kept = []
    for v in vectors:
        norm = float(np.linalg.norm(v.weights))
        if norm == 0.0:
            log.warning("unit %s has an all-zero network and is dropped", v.unit_id)
            continue
        kept.append(AdjacencyVector(v.unit_id, v.weights / norm))
    if len(kept) < 2:
        raise DegenerateProjection("need at least two units with non-zero networks")
    X = np.vstack([v.weights for v in kept])
    mean = X.mean(axis=0)
    return kept, X - mean, mean


def _split(unit_ids, groups: OutcomeGroups):
    a = np.array([groups.membership.get(u) is GROUP_A for u in unit_ids])
    b = np.array([groups.membership.get(u) is GROUP_B for u in unit_ids])
    return a, b


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def means_rotation(centered: np.ndarray, unit_ids: Sequence, groups: OutcomeGroups,
                   grand_mean: np.ndarray | None = None) -> EnaSpace:
    """MR1 along the group-mean difference, then SVD axes of the residual."""
    X = np.asarray(centered, dtype=float)
    a, b = _split(unit_ids, groups)
    if not a.any() or not b.any():
        raise GroupTooSmall("both outcome groups need at least one unit")
    diff = X[a].mean(axis=0) - X[b].mean(axis=0)
    norm = np.linalg.norm(diff)
    total = float((X ** 2).sum() / X.shape[0])
    if total == 0.0:
        raise DegenerateProjection("all units are identical; the projection is degenerate")
    if norm <= 1e-12 * max(1.0, float(np.abs(X).max())):
        raise IdenticalGroupMeans("group means coincide; MR1 is undefined")
    mr1 = diff / norm
    resid = X - np.outer(X @ mr1, mr1)
    _, s, vt = np.linalg.svd(resid, full_matrices=False)
    axes = [mr1]
    if s.size:
        keep = s > s[0] * 1e-10 if s[0] > 0 else np.zeros_like(s, dtype=bool)
        for v in vt[keep]:
            # re-orthogonalise against everything kept so far
            for q in axes:
                v = v - (v @ q) * q
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                axes.append(_fix_sign(v / nv))
    A = np.vstack(axes)
    scores = X @ A.T
    var = (scores ** 2).sum(axis=0) / X.shape[0] / total
    names = ("MR1",) + tuple(f"SVD{k + 2}" for k in range(A.shape[0] - 1))
    gm = np.zeros(X.shape[1]) if grand_mean is None else np.asarray(grand_mean)
    return EnaSpace(tuple(unit_ids), gm, A, names, var, scores, total)


def compare_groups(space: EnaSpace, groups: OutcomeGroups, axes: Sequence[str] = ("MR1", "SVD2"),
                   alpha: float = 0.05, m_tests: int | None = None) -> list[GroupComparison]:
    """Mann-Whitney U per axis between group A and group B, Bonferroni-adjusted."""
    a, b = _split(space.unit_ids, groups)
    if a.sum() < 1 or b.sum() < 1:
        raise GroupTooSmall("both outcome groups need at least one unit")
    axes = [ax for ax in axes if ax in space.axis_names]
    adj = statkit.bonferroni(alpha, m_tests or len(axes))
    out = []
    for ax in axes:
        s = space.scores(ax)
        res = statkit.mann_whitney(s[a], s[b])
        out.append(GroupComparison(ax, res.statistic, res.u_other, res.p_value,
                                   statkit.rank_biserial(res.statistic, res.n1, res.n2),
                                   res.method.value, res.n1, res.n2, float(np.median(s[a])),
                                   float(np.median(s[b])), adj))
    return out


def subtracted_network(normalized: Sequence[AdjacencyVector], groups: OutcomeGroups) -> np.ndarray:
    """Mean(A) - mean(B) edge weights on sphere-normalised vectors."""
    ids = [v.unit_id for v in normalized]
    X = np.vstack([v.weights for v in normalized])
    a, b = _split(ids, groups)
    if not a.any() or not b.any():
        raise GroupTooSmall("both outcome groups need at least one unit")
    return X[a].mean(axis=0) - X[b].mean(axis=0)


@dataclass(frozen=True, eq=False)
class EnaResult:
    codes: tuple[str, ...]
    groups: OutcomeGroups
    normalized: list[AdjacencyVector]
    space: EnaSpace
    comparisons: list[GroupComparison]
    subtracted: np.ndarray


def run_ena(lines_by_unit: Mapping[object, np.ndarray], codes: Sequence[str], groups: OutcomeGroups,
            stanza=WHOLE, alpha: float = 0.05, axes: Sequence[str] = ("MR1", "SVD2")) -> EnaResult:
    """Accumulate, project and compare, restricted to units that have a group."""
    units = {u: l for u, l in lines_by_unit.items() if u in groups.membership}
    vectors = accumulate_units(units, stanza)
    normalized, centered, mean = normalize_and_center(vectors)
    ids = [v.unit_id for v in normalized]
    space = means_rotation(centered, ids, groups, mean)
    comps = compare_groups(space, groups, axes, alpha)
    return EnaResult(tuple(codes), groups, normalized, space, comps, subtracted_network(normalized, groups))


def unit_label(unit) -> str:
    return ":".join(unit) if isinstance(unit, tuple) else str(unit)


def edge_rows(codes: Sequence[str], weights: np.ndarray) -> list[tuple[str, str, float, str]]:
    rows = []
    for (i, j), w in zip(pair_index(len(codes)), weights):
        side = GROUP_A.value if w > 0 else GROUP_B.value if w < 0 else ""
        rows.append((codes[i], codes[j], float(w), side))
    return rows


def report_dict(res: EnaResult, config: dict | None = None, n_axes: int = 2) -> dict:
    sp = res.space
    k = min(n_axes, len(sp.axis_names))
    return {
        "codes": list(res.codes),
        "groups": {"measure": res.groups.measure.value, "threshold": res.groups.threshold,
                   "A": GROUP_A.value, "B": GROUP_B.value,
                   "members": {unit_label(u): o.value for u, o in sorted(res.groups.membership.items())}},
        "variance_explained": {sp.axis_names[i]: float(sp.variance_explained[i]) for i in range(k)},
        "unit_scores": {unit_label(u): {sp.axis_names[i]: float(sp.unit_scores[n, i]) for i in range(k)}
                        for n, u in enumerate(sp.unit_ids)},
        "comparisons": [{"axis": c.axis, "U": c.U, "U_other": c.U_other, "p": c.p, "r": c.r,
                         "method": c.method, "n_A": c.n_a, "n_B": c.n_b, "median_A": c.median_a,
                         "median_B": c.median_b, "alpha_adjusted": c.alpha_adjusted,
                         "significant": c.significant} for c in res.comparisons],
        "subtracted_edges": [{"a": a, "b": b, "weight": w, "stronger_in": s}
                             for a, b, w, s in edge_rows(res.codes, res.subtracted)],
        "config": config if config is not None else {},
    }


def write_report(res: EnaResult, out_dir, config: dict | None = None) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "ena_report.json"
    path.write_text(json.dumps(report_dict(res, config), indent=2) + "\n", encoding="utf-8")
    with (out_dir / "edges.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["code_a", "code_b", "weight", "stronger_in"])
        for a, b, wt, s in edge_rows(res.codes, res.subtracted):
            w.writerow([a, b, repr(wt), s])
    return path
