import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmfuse import ena
from mmfuse.errors import DegenerateProjection, GroupTooSmall, IdenticalGroupMeans
from mmfuse.model import OutcomeGroups

from oracles import accumulate_naive

line = st.lists(st.booleans(), min_size=4, max_size=4)
lines5 = st.lists(line, min_size=1, max_size=5)


def test_within_line_pair():
    assert ena.accumulate([[1, 1, 0]]).tolist() == [1, 0, 0]


def test_cross_line_context():
    assert ena.accumulate([[1, 0], [0, 1]]).tolist() == [1]
    assert ena.accumulate([[1, 0], [0, 1]], ena.Window(1)).tolist() == [0]


def test_one_code_per_line_has_no_within_line_weight():
    L = np.eye(3)[[0, 1, 2, 1]]
    assert ena.accumulate(L, ena.Window(1)).sum() == 0
    assert ena.accumulate(L).sum() > 0


@settings(max_examples=100)
@given(lines5, st.one_of(st.none(), st.integers(1, 4)))
def test_accumulate_matches_oracle(lines, w):
    stanza = ena.WHOLE if w is None else ena.Window(w)
    assert ena.accumulate(np.array(lines), stanza).tolist() == accumulate_naive(lines, w)


@settings(max_examples=100)
@given(lines5, st.integers(0, 4))
def test_duplicate_line_adds_only_its_own_contribution(lines, k):
    k = min(k, len(lines) - 1)
    dup = lines[:k + 1] + [lines[k]] + lines[k + 1:]
    got = ena.accumulate(np.array(dup)) - ena.accumulate(np.array(lines))
    # the copy sees the same context as the original line, so it repeats that line's increment
    before = np.array(accumulate_naive(lines[:k])) if k else 0
    assert (got == np.array(accumulate_naive(lines[:k + 1])) - before).all()


def test_normalize_example():
    vs = [ena.AdjacencyVector("u1", np.array([3.0, 4.0, 0.0])), ena.AdjacencyVector("u2", np.array([0.0, 0.0, 2.0])),
          ena.AdjacencyVector("u3", np.zeros(3))]
    kept, centered, mean = ena.normalize_and_center(vs)
    assert [v.unit_id for v in kept] == ["u1", "u2"]
    assert kept[0].weights.tolist() == [0.6, 0.8, 0.0]
    assert np.allclose(centered.mean(axis=0), 0)
    with pytest.raises(DegenerateProjection):
        ena.normalize_and_center(vs[:1])


def _groups(ids_a, ids_b):
    return OutcomeGroups.from_ratings({**{u: 2 for u in ids_a}, **{u: 6 for u in ids_b}}, "task")


def test_identical_units_degenerate():
    X = np.zeros((4, 6))
    with pytest.raises(DegenerateProjection):
        ena.means_rotation(X, ["a", "b", "c", "d"], _groups(["a", "b"], ["c", "d"]))


def test_identical_group_means():
    X = np.array([[1.0, 0], [-1.0, 0], [1.0, 0], [-1.0, 0]])
    with pytest.raises(IdenticalGroupMeans):
        ena.means_rotation(X, ["a", "b", "c", "d"], _groups(["a", "b"], ["c", "d"]))


def test_group_too_small():
    X = np.random.default_rng(0).normal(size=(3, 4))
    with pytest.raises(GroupTooSmall):
        ena.means_rotation(X, ["a", "b", "c"], _groups(["a", "b", "c"], []))


def test_mr1_follows_single_coordinate():
    rng = np.random.default_rng(1)
    X = np.zeros((8, 10))
    X[:, :5] = rng.normal(size=(8, 5))
    X[:4, :5] = X[4:, :5]  # same spread in both groups
    X[:4, 5] = 1.0
    X[4:, 5] = -1.0
    X -= X.mean(axis=0)
    ids = [f"u{i}" for i in range(8)]
    space = ena.means_rotation(X, ids, _groups(ids[:4], ids[4:]))
    e5 = np.zeros(10)
    e5[5] = 1.0
    assert np.allclose(space.axes[0], e5, atol=1e-12)
    A = space.axes
    assert np.allclose(A @ A.T, np.eye(len(A)), atol=1e-10)
    assert (space.variance_explained >= 0).all() and space.variance_explained.sum() <= 1 + 1e-9


def test_compare_groups_small_example():
    space = ena.EnaSpace(("a", "b", "c", "d"), np.zeros(2), np.eye(2), ("MR1", "SVD2"), np.zeros(2),
                         np.array([[1.0, 0.0], [2.0, 1.0], [3.0, 0.5], [4.0, 2.0]]), 1.0)
    comps = ena.compare_groups(space, _groups(["a", "b"], ["c", "d"]))
    mr1 = comps[0]
    assert mr1.U == 0 and mr1.U_other == 4
    assert abs(mr1.p - 1 / 3) < 1e-15
    assert mr1.r == 1.0
    assert mr1.alpha_adjusted == 0.025
    assert not mr1.significant


def test_compare_identical_groups():
    space = ena.EnaSpace(("a", "b", "c", "d"), np.zeros(1), np.eye(1), ("MR1",), np.zeros(1),
                         np.array([[1.0], [2.0], [1.0], [2.0]]), 1.0)
    c = ena.compare_groups(space, _groups(["a", "b"], ["c", "d"]))[0]
    assert c.r == 0.0 and c.p >= 0.05 and c.U + c.U_other == 4


def test_subtracted_network_examples():
    a = ena.AdjacencyVector("a", np.array([0.6, 0.8, 0.0]))
    b = ena.AdjacencyVector("b", np.array([0.0, 0.6, 0.8]))
    assert ena.subtracted_network([a, b], _groups(["a"], ["b"])).tolist() == pytest.approx([0.6, 0.2, -0.8])
    a2 = ena.AdjacencyVector("c", a.weights)
    assert (ena.subtracted_network([a, a2], _groups(["a"], ["c"])) == 0).all()


def _lines(seed, n_units=12, C=5):
    rng = np.random.default_rng(seed)
    return {f"u{i:02d}": (rng.random((15, C)) < (0.2 + 0.4 * (i % 2) * np.eye(C)[0] + 0.1)).astype(int)
            for i in range(n_units)}


def test_planted_a_only_pair():
    lines = _lines(0)
    for u in list(lines)[::2]:
        lines[u][:, 3:] = 0  # codes 3 and 4 never appear for group B
    groups = _groups(list(lines)[1::2], list(lines)[::2])
    res = ena.run_ena(lines, [f"c{j}" for j in range(5)], groups)
    idx = ena.pair_index(5).index((3, 4))
    assert res.subtracted[idx] > 0


def _run(lines, seed=0):
    ids = sorted(lines)
    groups = _groups(ids[: len(ids) // 2], ids[len(ids) // 2:])
    return ena.run_ena(lines, [f"c{j}" for j in range(5)], groups)


def test_unit_permutation_invariance():
    lines = _lines(2)
    a = _run(lines)
    b = _run(dict(reversed(list(lines.items()))))
    sa = dict(zip(a.space.unit_ids, a.space.unit_scores[:, 0]))
    sb = dict(zip(b.space.unit_ids, b.space.unit_scores[:, 0]))
    assert all(abs(sa[u] - sb[u]) < 1e-12 for u in sa)
    assert a.comparisons[0].p == b.comparisons[0].p


def test_scaling_invariance():
    vecs = [ena.AdjacencyVector(u, ena.accumulate(l)) for u, l in _lines(3).items()]
    ids = [v.unit_id for v in vecs]
    groups = _groups(ids[:6], ids[6:])
    kept, X, m = ena.normalize_and_center(vecs)
    kept2, X2, m2 = ena.normalize_and_center([ena.AdjacencyVector(v.unit_id, 7.5 * v.weights) for v in vecs])
    assert np.allclose(X, X2, atol=1e-12)
    s1 = ena.means_rotation(X, ids, groups, m)
    s2 = ena.means_rotation(X2, ids, groups, m2)
    assert np.allclose(s1.unit_scores, s2.unit_scores, atol=1e-10)
    c1, c2 = ena.compare_groups(s1, groups), ena.compare_groups(s2, groups)
    assert [(c.p, c.r) for c in c1] == [(c.p, c.r) for c in c2]


def test_report_files(tmp_path):
    res = _run(_lines(4))
    ena.write_report(res, tmp_path, {"stanza": "whole"})
    d = json.loads((tmp_path / "ena_report.json").read_text())
    assert set(d["variance_explained"]) == {"MR1", "SVD2"}
    assert d["groups"]["A"] == "Unsatisfied"
    assert d["comparisons"][0]["axis"] == "MR1"
    assert (tmp_path / "edges.csv").read_text().splitlines()[0] == "code_a,code_b,weight,stronger_in"
