"""End-to-end orchestration: ingest, indicators, LCA, ENA and reports.

Every stage reads and writes files under ``<output_dir>/run-<seed>/``::

    validation.json   per-session ValidationReport
    intervals.csv     monomodal interval records
    surveys.csv       session_id,student_id,task_satisfaction,collab_satisfaction
    prescreen.json    Spearman matrix and flagged pairs
    sweep.csv         K, logL, BIC per fitted class count
    model.json        chosen model
    profiles.svg      binarised class profiles
    assignments.csv   posterior and MAP class per record
    ena/<codes>-<measure>/{ena_report.json, edges.csv, network.svg}
    report.json       summary of the whole run
"""
from __future__ import annotations

import csv
import glob
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ena, lca, plots
from .errors import ConfigError, FuseError, IngestError
from .ingest import ValidationReport, load_session, validate, Finding
from .model import Measure, OutcomeGroups, Survey, default_catalog
from .physio import PhysioConfig
from .spatial import SpatialConfig
from .sync import IndicatorConfig, SyncConfig, read_intervals, session_intervals, write_intervals

log = logging.getLogger(__name__)

CODE_SETS = ("monomodal", "multimodal")


class StageError(FuseError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class EnaConfig:
    stanza: str | int = "whole"  # "whole" or a window length in lines
    codes: tuple[str, ...] = CODE_SETS
    measures: tuple[str, ...] = ("task", "collab")
    alpha: float = 0.05
    threshold: int = 4

    def __post_init__(self):
        if self.stanza != "whole" and not (isinstance(self.stanza, int) and self.stanza >= 1):
            raise ConfigError("ena.stanza must be 'whole' or a positive window length")
        for c in self.codes:
            if c not in CODE_SETS:
                raise ConfigError(f"ena.codes entries must be one of {CODE_SETS}")
        for m in self.measures:
            Measure(m)

    @property
    def stanza_mode(self):
        return ena.WHOLE if self.stanza == "whole" else ena.Window(int(self.stanza))


_IND_KEYS = {"sync": {f.name for f in fields(SyncConfig)},
             "spatial": {f.name for f in fields(SpatialConfig)},
             "physio": {f.name for f in fields(PhysioConfig)}}


def _indicator_config(d: dict) -> IndicatorConfig:
    parts = {k: {} for k in _IND_KEYS}
    for key, value in d.items():
        owner = next((k for k, names in _IND_KEYS.items() if key in names), None)
        if owner is None:
            raise ConfigError(f"unknown indicators setting {key!r}")
        parts[owner][key] = tuple(value) if isinstance(value, list) else value
    try:
        return IndicatorConfig(SyncConfig(**parts["sync"]), SpatialConfig(**parts["spatial"]),
                               PhysioConfig(**parts["physio"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid indicators settings: {exc}") from None


@dataclass(frozen=True)
class PipelineConfig:
    sessions: tuple[str, ...]
    output_dir: str = "out"
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    lca: lca.LcaConfig = field(default_factory=lca.LcaConfig)
    ena: EnaConfig = field(default_factory=EnaConfig)
    base_dir: Path = field(default=Path("."), compare=False)

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "PipelineConfig":
        unknown = set(d) - {"sessions", "output_dir", "indicators", "lca", "ena"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sessions = d.get("sessions")
        if isinstance(sessions, str):
            sessions = [sessions]
        if not sessions:
            raise ConfigError("config needs a non-empty 'sessions' list")
        try:
            lcfg = lca.LcaConfig(**d.get("lca", {}))
            ecfg = d.get("ena", {})
            ecfg = EnaConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in ecfg.items()})
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        if not 1 <= lcfg.k_min <= lcfg.k_max:
            raise ConfigError("lca needs 1 <= k_min <= k_max")
        if lcfg.restarts < 1 or lcfg.max_iter < 1 or not 0 < lcfg.eps < 0.5 or lcfg.tol <= 0:
            raise ConfigError("lca restarts/max_iter must be >= 1, 0 < eps < 0.5, tol > 0")
        return cls(tuple(str(s) for s in sessions), str(d.get("output_dir", "out")),
                   _indicator_config(d.get("indicators", {})), lcfg, ecfg, Path(base_dir))

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(d, path.parent)

    def to_dict(self) -> dict:
        """Provenance record embedded in every report (output location excluded)."""
        ind = {**asdict(self.indicators.sync), **asdict(self.indicators.spatial),
               **asdict(self.indicators.physio)}
        ind["analysis_phases"] = list(ind["analysis_phases"])
        e = asdict(self.ena)
        e["codes"], e["measures"] = list(e["codes"]), list(e["measures"])
        return {"sessions": list(self.sessions), "indicators": ind, "lca": asdict(self.lca), "ena": e}

    def with_output(self, output_dir) -> "PipelineConfig":
        return PipelineConfig(self.sessions, str(output_dir), self.indicators, self.lca, self.ena, self.base_dir)

    @property
    def run_dir(self) -> Path:
        out = Path(self.output_dir)
        if not out.is_absolute():
            out = self.base_dir / out
        return out / f"run-{self.lca.seed}"

    def session_paths(self) -> list[Path]:
        paths = []
        for s in self.sessions:
            p = Path(s) if Path(s).is_absolute() else self.base_dir / s
            # a pattern selects directories only; sibling files such as *.expected.csv are skipped
            matches = sorted(m for m in glob.glob(str(p)) if Path(m).is_dir()) if glob.has_magic(str(p)) else [str(p)]
            paths += [Path(m) for m in matches]
        if not paths:
            raise ConfigError("no session directories matched")
        return sorted(set(paths))


def _dump(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _pmap(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


# -- stages -------------------------------------------------------------------

def stage_validate(cfg: PipelineConfig, threads: int = 1):
    """Load and validate every session; returns (raw sessions or None, reports)."""
    catalog = default_catalog()

    def one(path):
        try:
            raw = load_session(path, catalog)
        except IngestError as exc:
            rep = ValidationReport(path.name)
            rep.errors.append(Finding(str(path.name), getattr(exc, "row", None), str(exc),
                                      type(exc).__name__))
            return None, rep
        return raw, validate(raw)

    results = _pmap(one, cfg.session_paths(), threads)
    ids = [rep.session_id for _, rep in results]
    if len(set(ids)) != len(ids):
        raise StageError("validate", "session directory names must be unique")
    cfg.run_dir.mkdir(parents=True, exist_ok=True)
    _dump(cfg.run_dir / "validation.json", {"sessions": [rep.to_dict() for _, rep in results],
                                            "config": cfg.to_dict()})
    return [r for r, _ in results], [rep for _, rep in results]


def stage_indicators(cfg: PipelineConfig, threads: int = 1):
    raws, reports = stage_validate(cfg, threads)
    failed = [rep.session_id for rep in reports if not rep.ok]
    if failed:
        raise ValidationFailed(failed)
    catalog = default_catalog()
    try:
        per = _pmap(lambda raw: session_intervals(raw, cfg.indicators, catalog), raws, threads)
    except FuseError as exc:
        raise StageError("indicators", str(exc)) from exc
    records = [r for rs in per for r in rs]
    write_intervals(records, cfg.run_dir / "intervals.csv", catalog)
    with (cfg.run_dir / "surveys.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["session_id", "student_id", "task_satisfaction", "collab_satisfaction"])
        for raw in sorted(raws, key=lambda r: r.session_id):
            for sid in sorted(raw.surveys):
                s = raw.surveys[sid]
                w.writerow([raw.session_id, sid, s.task_satisfaction, s.collab_satisfaction])
    return records


class ValidationFailed(FuseError):
    def __init__(self, sessions: Sequence[str]):
        super().__init__(f"[validate] sessions with errors: {', '.join(sessions)}")
        self.sessions = list(sessions)


def _need(path: Path, stage: str) -> Path:
    if not path.is_file():
        raise StageError(stage, f"missing {path.name}; run the earlier stages first")
    return path


def stage_fit(cfg: PipelineConfig, threads: int = 1) -> lca.FitResult:
    records, codes = read_intervals(_need(cfg.run_dir / "intervals.csv", "fit"))
    if not records:
        raise StageError("fit", "no interval records")
    Y = lca.as_matrix(records)
    pre = lca.spearman_prescreen(Y, cfg.lca.rho_max, codes)
    _dump(cfg.run_dir / "prescreen.json", {
        "rho_max": cfg.lca.rho_max, "codes": list(codes),
        "rho": [[None if not np.isfinite(v) else float(v) for v in row] for row in pre.rho],
        "flagged": [{"a": a, "b": b, "rho": r} for a, b, r in pre.flagged],
        "degenerate": pre.degenerate,
        "note": "records are pooled person-intervals treated as independent observations"})
    try:
        best, rows = lca.select_k(Y, cfg.lca, codes, threads)
    except FuseError as exc:
        raise StageError("fit", str(exc)) from exc
    lca.write_sweep(rows, cfg.run_dir / "sweep.csv")
    lca.save_model(best, cfg.run_dir / "model.json", cfg.to_dict())
    profiles = lca.binary_profiles(best.model)
    (cfg.run_dir / "profiles.svg").write_text(plots.profiles_svg(profiles, codes), encoding="utf-8")
    return best


def stage_assign(cfg: PipelineConfig) -> lca.ClassAssignment:
    model = lca.load_model(_need(cfg.run_dir / "model.json", "assign"))
    records, _ = read_intervals(_need(cfg.run_dir / "intervals.csv", "assign"))
    try:
        assignment = lca.posterior_assign(model, records)
    except FuseError as exc:
        raise StageError("assign", str(exc)) from exc
    lca.write_assignments(records, assignment, cfg.run_dir / "assignments.csv")
    return assignment


def read_surveys(path) -> dict[tuple[str, str], Survey]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return {(r["session_id"], r["student_id"]): Survey(int(r["task_satisfaction"]),
                                                            int(r["collab_satisfaction"]))
                for r in csv.DictReader(fh)}


def unit_lines(cfg: PipelineConfig, codes: str) -> tuple[dict, tuple[str, ...]]:
    """Lines per (session, student) unit, ordered by interval index."""
    records, names = read_intervals(_need(cfg.run_dir / "intervals.csv", "ena"))
    if codes == "multimodal":
        model = lca.load_model(_need(cfg.run_dir / "model.json", "ena"))
        labels = lca.read_assignments(_need(cfg.run_dir / "assignments.csv", "ena"))
        names = tuple(f"Class{k + 1}" for k in range(model.K))
        rows = {}
        for r in records:
            onehot = [0] * model.K
            onehot[labels[r.key]] = 1
            rows.setdefault(r.unit, []).append((r.interval_index, onehot))
    else:
        rows = {}
        for r in records:
            rows.setdefault(r.unit, []).append((r.interval_index, list(r.values)))
    lines = {u: np.array([v for _, v in sorted(items)], dtype=np.int8) for u, items in sorted(rows.items())}
    return lines, names


def stage_ena(cfg: PipelineConfig, codes: str, measure: str) -> Path:
    lines, names = unit_lines(cfg, codes)
    surveys = read_surveys(_need(cfg.run_dir / "surveys.csv", "ena"))
    groups = OutcomeGroups.from_surveys({u: s for u, s in surveys.items() if u in lines}, measure,
                                        cfg.ena.threshold)
    try:
        res = ena.run_ena(lines, names, groups, cfg.ena.stanza_mode, cfg.ena.alpha)
    except FuseError as exc:
        raise StageError("ena", str(exc)) from exc
    out = cfg.run_dir / "ena" / f"{codes}-{Measure(measure).value}"
    path = ena.write_report(res, out, cfg.to_dict())
    title = f"{codes} codes, {Measure(measure).value} satisfaction: Unsatisfied - Satisfied"
    (out / "network.svg").write_text(plots.network_svg(names, res.subtracted, title), encoding="utf-8")
    return path


def stage_report(cfg: PipelineConfig) -> Path:
    model_d = json.loads(_need(cfg.run_dir / "model.json", "report").read_text(encoding="utf-8"))
    model = lca.LcaModel.from_dict(model_d)
    with _need(cfg.run_dir / "sweep.csv", "report").open(newline="", encoding="utf-8") as fh:
        sweep = [{"K": int(r["K"]), "logL": float(r["logL"]), "bic": float(r["bic"]),
                  "converged": bool(int(r["converged"]))} for r in csv.DictReader(fh)]
    prescreen = json.loads(_need(cfg.run_dir / "prescreen.json", "report").read_text(encoding="utf-8"))
    profiles = lca.binary_profiles(model)
    labels = lca.read_assignments(cfg.run_dir / "assignments.csv") if (cfg.run_dir / "assignments.csv").is_file() else {}
    sizes = np.bincount(np.fromiter(labels.values(), dtype=np.int64), minlength=model.K) if labels else []
    enas = {}
    for p in sorted((cfg.run_dir / "ena").glob("*/ena_report.json")):
        d = json.loads(p.read_text(encoding="utf-8"))
        enas[p.parent.name] = {"variance_explained": d["variance_explained"], "comparisons": d["comparisons"]}
    report = {
        "config": cfg.to_dict(),
        "n_records": model_d["n_obs"],
        "prescreen_flagged": prescreen["flagged"],
        "sweep": sweep,
        "chosen_K": model.K,
        "profiles": {f"Class{k + 1}": [c for c, b in zip(model.code_names, profiles[k]) if b]
                     for k in range(model.K)},
        "class_weights": model.weights.tolist(),
        "class_sizes": [int(v) for v in sizes],
        "ena": enas,
    }
    path = cfg.run_dir / "report.json"
    _dump(path, report)
    return path


def run(cfg: PipelineConfig, threads: int = 1) -> int:
    """Execute every stage; 0 on success, 1 on validation errors, 2 on other failures."""
    try:
        stage_indicators(cfg, threads)
        stage_fit(cfg, threads)
        stage_assign(cfg)
        for codes in cfg.ena.codes:
            for measure in cfg.ena.measures:
                stage_ena(cfg, codes, measure)
        stage_report(cfg)
    except (ValidationFailed, ConfigError) as exc:
        log.error("%s", exc)
        return 1
    except FuseError as exc:
        log.error("%s", exc)
        return 2
    return 0
