import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmfuse import lca, synthgen
from mmfuse.model import IntervalRecord

from oracles import lca_loglik_naive, spearman_exact

CFG = lca.LcaConfig(restarts=5)


def random_data(seed, n=150, J=6):
    return np.random.default_rng(seed).integers(0, 2, size=(n, J)).astype(float)


def test_k1_closed_form():
    Y = random_data(0)
    Y[:, 2] = 1.0
    fit = lca.fit_em(Y, 1, CFG)
    theta = np.clip(Y.mean(axis=0), 1e-4, 1 - 1e-4)
    assert np.allclose(fit.model.item_probs[0], theta, atol=1e-12)
    ll = float((Y * np.log(theta) + (1 - Y) * np.log1p(-theta)).sum())
    assert abs(fit.log_likelihood - ll) < 1e-8
    assert fit.model.weights.tolist() == [1.0]


def test_two_pattern_dataset():
    Y = np.vstack([np.ones((50, 8)), np.zeros((50, 8))])
    fit = lca.fit_em(Y, 2, lca.LcaConfig())
    th = fit.model.item_probs
    hi, lo = (0, 1) if th[0, 0] > 0.5 else (1, 0)
    assert np.allclose(th[hi], 1 - 1e-4, atol=1e-6)
    assert np.allclose(th[lo], 1e-4, atol=1e-6)
    assert np.allclose(fit.model.weights, 0.5, atol=1e-6)


def test_degenerate_data_selects_one_class():
    Y = np.tile([1, 0, 1, 1, 0], (80, 1)).astype(float)
    best, rows = lca.select_k(Y, lca.LcaConfig(k_max=4, restarts=4))
    assert best.model.K == 1
    assert [r.K for r in rows] == [1, 2, 3, 4]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_model_invariants(seed, K):
    Y = random_data(seed, n=80)
    fit = lca.fit_em(Y, K, CFG)
    m = fit.model
    assert abs(m.weights.sum() - 1) <= 1e-12
    assert (np.diff(m.weights) <= 0).all()
    assert (m.item_probs >= 1e-4).all() and (m.item_probs <= 1 - 1e-4).all()
    assert fit.bic == -2 * fit.log_likelihood + ((K - 1) + K * Y.shape[1]) * math.log(len(Y))
    if fit.converged:
        a, b = fit.trace[-2:]
        assert abs(b - a) < CFG.tol * abs(b)
    assert abs(fit.log_likelihood - lca_loglik_naive(Y, m.weights, m.item_probs)) < 1e-8
    assert (np.diff(fit.trace) >= -1e-9).all()


def test_debug_mode_checks_every_restart():
    lca.fit_em(random_data(3), 3, lca.LcaConfig(restarts=10), debug=True)


def test_deterministic_and_row_order_free():
    Y = random_data(7)
    a = lca.fit_em(Y, 3, CFG)
    b = lca.fit_em(Y, 3, CFG)
    c = lca.fit_em(Y[np.random.default_rng(1).permutation(len(Y))], 3, CFG)
    for other in (b, c):
        assert np.array_equal(a.model.item_probs, other.model.item_probs)
        assert np.array_equal(a.model.weights, other.model.weights)
        assert a.log_likelihood == other.log_likelihood


def test_threads_do_not_change_selection():
    Y, _ = synthgen.sample_matrix(synthgen.fig3_spec(600, seed=2))
    cfg = lca.LcaConfig(k_max=5, restarts=4)
    a, ra = lca.select_k(Y, cfg)
    b, rb = lca.select_k(Y, cfg, threads=4)
    assert ra == rb
    assert np.array_equal(a.model.item_probs, b.model.item_probs)


def test_posterior_properties():
    spec = synthgen.fig3_spec(400, seed=1)
    model = lca.LcaModel(spec.weights, spec.item_probs)
    Y, _ = synthgen.sample_matrix(spec)
    post = lca.posterior_assign(model, Y)
    assert np.allclose(post.posterior.sum(axis=1), 1, atol=1e-9)
    prof = lca.binary_profiles(model)
    for k in range(4):
        assert lca.posterior_assign(model, prof[k:k + 1]).posterior[0, k] > 0.99
    one = lca.posterior_assign(lca.LcaModel(np.array([1.0]), np.full((1, 17), 0.3)), Y)
    assert (one.posterior == 1.0).all() and (one.map_class == 0).all()


def test_map_ties_go_to_lower_index():
    model = lca.LcaModel(np.array([0.5, 0.5]), np.array([[0.3, 0.7], [0.3, 0.7]]))
    assert lca.posterior_assign(model, np.array([[1.0, 0.0]])).map_class.tolist() == [0]


def test_binary_profiles_threshold():
    model = lca.LcaModel(np.array([1.0]), np.array([[0.9, 0.5, 0.4999, 0.05]]))
    assert lca.binary_profiles(model).tolist() == [[1, 1, 0, 0]]


def test_prescreen():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, 300)
    b = rng.integers(0, 2, 300)
    Y = np.column_stack([a, 1 - a, b, np.ones(300)])
    pre = lca.spearman_prescreen(Y, 0.8, ("a", "not_a", "b", "const"))
    assert pre.rho[0, 0] == 1.0
    assert pre.rho[0, 1] == -1.0
    assert abs(pre.rho[0, 2] - spearman_exact(a.tolist(), b.tolist())) < 1e-12
    assert pre.flagged == [("a", "not_a", -1.0)]
    assert pre.degenerate == ["const"]
    assert np.isnan(pre.rho[3, 0])


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        lca.fit_em(np.array([[0.0, 2.0]]), 1)
    with pytest.raises(ValueError):
        lca.fit_em(np.zeros((3, 2)), 4)
    model = lca.LcaModel(np.array([1.0]), np.full((1, 3), 0.5))
    with pytest.raises(lca.DimensionMismatch):
        lca.posterior_assign(model, np.zeros((2, 4)))


def test_model_and_assignment_files(tmp_path):
    Y = random_data(5, J=17)
    recs = [IntervalRecord("S", f"s{i % 4}", i // 4, tuple(int(v) for v in row)) for i, row in enumerate(Y)]
    fit = lca.fit_em(recs, 2, CFG, code_names=[f"c{j}" for j in range(17)])
    lca.save_model(fit, tmp_path / "model.json", {"seed": 0})
    d = json.loads((tmp_path / "model.json").read_text())
    assert {"K", "weights", "item_probs", "code_names", "logL", "bic", "config"} <= set(d)
    back = lca.load_model(tmp_path / "model.json")
    assert np.array_equal(back.item_probs, fit.model.item_probs)
    post = lca.posterior_assign(back, recs)
    lca.write_assignments(recs, post, tmp_path / "assignments.csv")
    header = (tmp_path / "assignments.csv").read_text().splitlines()[0]
    assert header == "session_id,student_id,interval_index,map_class,p_1,p_2"
    labels = lca.read_assignments(tmp_path / "assignments.csv")
    assert [labels[r.key] for r in recs] == post.map_class.tolist()
