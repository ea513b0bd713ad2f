"""Latent class analysis for binary indicators.

Models are fitted by EM from several random starts. Identical response
patterns are collapsed to (pattern, count) pairs before fitting, and all
restarts for one class count are iterated together as a single batch; a
restart leaves the batch once its relative log-likelihood change drops
below ``tol``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import statkit
from .errors import AllRestartsFailed, DimensionMismatch, FuseError, ZeroVariance
from .model import IntervalRecord

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class LcaConfig:
    k_min: int = 1
    k_max: int = 10
    restarts: int = 20
    tol: float = 1e-6  # relative change in log-likelihood
    max_iter: int = 500
    eps: float = 1e-4  # item probabilities clamped to [eps, 1 - eps]
    seed: int = 0
    rho_max: float = 0.8
    init_low: float = 0.2
    init_high: float = 0.8


@dataclass(frozen=True, eq=False)
class LcaModel:
    """Class weights and per-class item probabilities, classes ordered by
    descending weight."""

    weights: np.ndarray
    item_probs: np.ndarray
    code_names: tuple[str, ...] = ()

    @property
    def K(self) -> int:
        return self.item_probs.shape[0]

    @property
    def J(self) -> int:
        return self.item_probs.shape[1]

    def to_dict(self) -> dict:
        return {"K": self.K, "weights": self.weights.tolist(),
                "item_probs": self.item_probs.tolist(), "code_names": list(self.code_names)}

    @classmethod
    def from_dict(cls, d) -> "LcaModel":
        return cls(np.asarray(d["weights"], dtype=float), np.asarray(d["item_probs"], dtype=float),
                   tuple(d.get("code_names", ())))


@dataclass(frozen=True, eq=False)
class FitResult:
    model: LcaModel
    log_likelihood: float
    bic: float
    n_obs: int
    n_iter: int
    converged: bool
    seed: int
    restarts_used: int
    trace: np.ndarray = field(repr=False)  # log-likelihood per EM iteration of the best restart
    restart_log_likelihoods: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SweepRow:
    K: int
    log_likelihood: float
    bic: float
    converged: bool
    n_iter: int
    error: str = ""


@dataclass(frozen=True, eq=False)
class ClassAssignment:
    """Posterior responsibilities ``(n, K)`` and MAP labels ``(n,)``."""

    posterior: np.ndarray
    map_class: np.ndarray

    def __len__(self):
        return len(self.map_class)

    def __iter__(self):
        return zip(self.posterior, self.map_class)


@dataclass(frozen=True)
class Prescreen:
    rho: np.ndarray
    flagged: list[tuple[str, str, float]]
    degenerate: list[str]
    code_names: tuple[str, ...]


def n_parameters(K: int, J: int) -> int:
    return (K - 1) + K * J


def bic(log_likelihood: float, K: int, J: int, n_obs: int) -> float:
    return -2.0 * log_likelihood + n_parameters(K, J) * math.log(n_obs)


def as_matrix(data) -> np.ndarray:
    """0/1 float matrix from an array or a sequence of IntervalRecords."""
    if len(data) and isinstance(data[0], IntervalRecord):
        data = [r.values for r in data]
    Y = np.asarray(data, dtype=float)
    if Y.ndim != 2:
        raise DimensionMismatch("indicator data must be two-dimensional")
    if not np.isin(Y, (0.0, 1.0)).all():
        raise ValueError("indicator data must be binary")
    return Y


def spearman_prescreen(data, rho_max: float = 0.8, code_names: Sequence[str] = ()) -> Prescreen:
    """Pairwise Spearman rho over pooled records; pairs with |rho| > rho_max
    are flagged for the analyst, never dropped."""
    Y = as_matrix(data)
    n, J = Y.shape
    if n < 2:
        raise ValueError("need at least two records")
    names = tuple(code_names) or tuple(f"item{j + 1}" for j in range(J))
    rho = np.eye(J)
    degenerate = [names[j] for j in range(J) if np.ptp(Y[:, j]) == 0]
    flagged = []
    for a in range(J):
        for b in range(a + 1, J):
            try:
                r = statkit.spearman(Y[:, a], Y[:, b])
            except ZeroVariance:
                r = np.nan
            rho[a, b] = rho[b, a] = r
            if np.isfinite(r) and abs(r) > rho_max:
                flagged.append((names[a], names[b], r))
    for j in range(J):
        if names[j] in degenerate:
            rho[j, j] = np.nan
    return Prescreen(rho, flagged, degenerate, names)


def _log_components(Y, theta, weights):
    """log pi_k + log P(y_i | k) shaped ``(..., K, m)``."""
    with np.errstate(divide="ignore"):
        lt, l1, lw = np.log(theta), np.log1p(-theta), np.log(weights)
    lead = theta.shape[:-1]
    J = theta.shape[-1]
    lp = ((lt - l1).reshape(-1, J) @ Y.T).reshape(*lead, Y.shape[0])
    lp += (l1.sum(-1) + lw)[..., None]
    return lp


def _canonical_order(weights, theta) -> np.ndarray:
    keys = tuple(-theta[:, j] for j in reversed(range(theta.shape[1]))) + (-weights,)
    return np.lexsort(keys)


def _em_batch(P, w, theta, weights, cfg: LcaConfig, debug=False):
    """Run EM for a batch of restarts on patterns ``P`` with counts ``w``.

    Returns final theta, weights, log-likelihoods, iteration counts,
    convergence flags and per-restart traces.
    """
    R, K, J = theta.shape
    m = P.shape[0]
    n = w.sum()
    out_theta = theta.copy()
    out_w = weights.copy()
    out_ll = np.full(R, np.nan)
    out_it = np.zeros(R, dtype=np.int64)
    out_conv = np.zeros(R, dtype=bool)
    traces: list[list[float]] = [[] for _ in range(R)]
    active = np.arange(R)
    prev = np.full(R, -np.inf)
    for it in range(cfg.max_iter + 1):
        lp = _log_components(P, theta, weights)
        mx = lp.max(axis=1)
        lp -= mx[:, None, :]
        np.exp(lp, out=lp)
        tot = lp.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ll = (np.log(tot) + mx) @ w
        for a, v in zip(active, ll):
            traces[a].append(float(v))
        bad = ~np.isfinite(ll)
        if debug:
            ok = ~bad & np.isfinite(prev)
            assert np.all(ll[ok] >= prev[ok] - MONOTONE_TOL), "EM log-likelihood decreased"
        with np.errstate(invalid="ignore"):
            conv = ~bad & (np.abs(ll - prev) < cfg.tol * np.abs(ll))
        stop = bad | conv | (it == cfg.max_iter)
        if stop.any():
            idx = active[stop]
            out_theta[idx] = theta[stop]
            out_w[idx] = weights[stop]
            out_ll[idx] = np.where(bad[stop], np.nan, ll[stop])
            out_it[idx] = it
            out_conv[idx] = conv[stop]
            keep = ~stop
            active = active[keep]
            if not active.size:
                break
            lp, tot, ll = lp[keep], tot[keep], ll[keep]
            theta, weights = theta[keep], weights[keep]
        prev = ll
        # M-step
        lp *= (w / tot)[:, None, :]
        nk = lp.sum(axis=2)
        weights = nk / n
        num = (lp.reshape(-1, m) @ P).reshape(len(active), K, J)
        with np.errstate(divide="ignore", invalid="ignore"):
            new = num / nk[..., None]
        theta = np.clip(np.where(nk[..., None] > 0, new, theta), cfg.eps, 1.0 - cfg.eps)
    return out_theta, out_w, out_ll, out_it, out_conv, traces


def fit_em(data, K: int, cfg: LcaConfig = LcaConfig(), code_names: Sequence[str] = (),
           debug: bool = False) -> FitResult:
    """Best-of-restarts maximum-likelihood latent class model with ``K`` classes."""
    Y = as_matrix(data)
    n, J = Y.shape
    if K < 1 or n < K:
        raise ValueError(f"need 1 <= K <= n_obs (K={K}, n={n})")
    if J < 1:
        raise DimensionMismatch("need at least one indicator")
    P, counts = np.unique(Y, axis=0, return_counts=True)
    w = counts.astype(float)

    streams = np.random.SeedSequence([cfg.seed, K]).spawn(cfg.restarts)
    theta0 = np.empty((cfg.restarts, K, J))
    weights0 = np.empty((cfg.restarts, K))
    for r, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        theta0[r] = rng.uniform(cfg.init_low, cfg.init_high, size=(K, J))
        weights0[r] = rng.dirichlet(np.ones(K))

    theta, weights, ll, iters, conv, traces = _em_batch(P, w, theta0, weights0, cfg, debug)
    ok = np.isfinite(ll)
    for r in np.flatnonzero(~ok):
        log.warning("K=%d restart %d: non-finite likelihood, restart discarded", K, r)
    if not ok.any():
        raise AllRestartsFailed(f"all {cfg.restarts} restarts failed for K={K}")
    best = int(np.argmax(np.where(ok, ll, -np.inf)))
    order = _canonical_order(weights[best], theta[best])
    wt = weights[best][order]
    wt = wt / wt.sum()
    model = LcaModel(wt, theta[best][order], tuple(code_names))
    final_ll = float(ll[best])
    return FitResult(model, final_ll, bic(final_ll, K, J, n), n, int(iters[best]), bool(conv[best]),
                     cfg.seed, int(ok.sum()), np.asarray(traces[best]), ll)


def select_k(data, cfg: LcaConfig = LcaConfig(), code_names: Sequence[str] = (),
             threads: int = 1) -> tuple[FitResult, list[SweepRow]]:
    """Fit every K in ``[k_min, k_max]`` and keep the lowest-BIC model."""
    Y = as_matrix(data)
    ks = [k for k in range(cfg.k_min, cfg.k_max + 1) if k <= Y.shape[0]]
    if not ks:
        raise ValueError("no feasible K in range")

    def one(k):
        try:
            return fit_em(Y, k, cfg, code_names)
        except FuseError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ks))
    else:
        results = [one(k) for k in ks]

    rows, fits = [], {}
    for k, res in zip(ks, results):
        if isinstance(res, Exception):
            rows.append(SweepRow(k, float("nan"), float("nan"), False, 0, str(res)))
        else:
            fits[k] = res
            rows.append(SweepRow(k, res.log_likelihood, res.bic, res.converged, res.n_iter))
    if not fits:
        raise AllRestartsFailed("no K could be fitted")
    prev = None
    for k in sorted(fits):
        if prev is not None and fits[k].log_likelihood < fits[prev].log_likelihood - 1e-6:
            log.warning("log-likelihood for K=%d below K=%d; optimisation may not have reached "
                        "the global maximum", k, prev)
        prev = k
    best_k = min(fits, key=lambda k: (fits[k].bic, k))
    return fits[best_k], rows


def posterior_assign(model: LcaModel, data) -> ClassAssignment:
    """Bayes-rule responsibilities and MAP labels (ties to the lower index)."""
    Y = as_matrix(data)
    if Y.shape[1] != model.J:
        raise DimensionMismatch(f"model has {model.J} items, data has {Y.shape[1]}")
    lp = _log_components(Y, model.item_probs, model.weights)  # (K, n)
    lp -= lp.max(axis=0)
    p = np.exp(lp)
    p /= p.sum(axis=0)
    post = p.T
    return ClassAssignment(post, np.argmax(post, axis=1))


def log_likelihood(model: LcaModel, data) -> float:
    Y = as_matrix(data)
    lp = _log_components(Y, model.item_probs, model.weights)
    mx = lp.max(axis=0)
    return float((np.log(np.exp(lp - mx).sum(axis=0)) + mx).sum())


def binary_profiles(model: LcaModel, threshold: float = 0.5) -> np.ndarray:
    """Presence profile per class: 1 where the item probability is >= threshold."""
    return (model.item_probs >= threshold).astype(np.int64)


# ---- file formats ---------------------------------------------------------

def save_model(fit: FitResult, path, config: dict | None = None) -> None:
    d = fit.model.to_dict()
    d.update({"logL": fit.log_likelihood, "bic": fit.bic, "n_obs": fit.n_obs, "n_iter": fit.n_iter,
              "converged": fit.converged, "seed": fit.seed, "restarts_used": fit.restarts_used,
              "config": config if config is not None else {}})
    Path(path).write_text(json.dumps(d, indent=2) + "\n", encoding="utf-8")


def load_model(path) -> LcaModel:
    return LcaModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_sweep(rows: Sequence[SweepRow], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["K", "logL", "bic", "converged", "n_iter", "error"])
        for r in rows:
            w.writerow([r.K, repr(r.log_likelihood), repr(r.bic), int(r.converged), r.n_iter, r.error])


def write_assignments(records: Sequence[IntervalRecord], assignment: ClassAssignment, path) -> None:
    K = assignment.posterior.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["session_id", "student_id", "interval_index", "map_class",
                    *[f"p_{k + 1}" for k in range(K)]])
        for r, (post, c) in zip(records, assignment):
            w.writerow([r.session_id, r.student_id, r.interval_index, int(c) + 1,
                        *[repr(float(p)) for p in post]])


def read_assignments(path) -> dict[tuple[str, str, int], int]:
    """Map record key to 0-based MAP class."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return {(row["session_id"], row["student_id"], int(row["interval_index"])): int(row["map_class"]) - 1
                for row in reader}


def config_dict(cfg: LcaConfig) -> dict:
    return asdict(cfg)
