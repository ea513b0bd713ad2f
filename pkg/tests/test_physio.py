import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmfuse.errors import InsufficientBaselineData
from mmfuse.model import HeartRateSeries
from mmfuse.physio import arousal_flags, baseline, mean_partner_correlation, synchrony_flags

from oracles import pearson_exact


def hr(values, t0=0):
    return HeartRateSeries(np.arange(t0, t0 + len(values)), values)


def test_baseline_examples():
    assert baseline(hr([80.0] * 60), (0, 60)) == 80.0
    assert baseline(hr([70.0, 80.0, 90.0] * 10), (0, 60)) == 80.0
    with pytest.raises(InsufficientBaselineData):
        baseline(hr([70.0] * 60, t0=100), (0, 60))
    with pytest.raises(InsufficientBaselineData):
        baseline(hr([70.0] * 29), (0, 60))


def test_baseline_uses_phase_one_only():
    assert baseline(hr([60.0] * 60 + [120.0] * 60), (0, 60)) == 60.0


def test_arousal_examples():
    assert arousal_flags(np.array([85.0]), 80.0).tolist() == [True]
    assert arousal_flags(np.array([80.0]), 80.0).tolist() == [False]
    assert arousal_flags(np.array([np.nan, 90.0]), 80.0).tolist() == [False, True]


quarter = st.integers(160, 800).map(lambda v: v / 4)


@given(st.lists(quarter, min_size=1, max_size=50), quarter, st.integers(-30, 30))
def test_arousal_shift_invariant(bpm, base, c):
    bpm = np.array(bpm)
    assert (arousal_flags(bpm, base) == arousal_flags(bpm + c, base + c)).all()


def test_identical_ramps():
    ramp = np.arange(60.0, 90.0)
    grid = np.vstack([ramp] * 4)
    flags, r = synchrony_flags(grid, 30)
    assert r[:, 29].tolist() == [1.0] * 4
    assert flags[:, 29].all() and not flags[:, :29].any()


def test_negated_partner():
    ramp = np.arange(60.0, 90.0)
    r = mean_partner_correlation(np.vstack([ramp, -ramp]), 30)
    assert r[0, 29] == -1.0 and r[1, 29] == -1.0


def test_three_student_fixture_matches_oracle():
    rng = np.random.default_rng(4)
    grid = rng.normal(80, 5, size=(3, 30)).round(1)
    got = mean_partner_correlation(grid, 30)[:, 29]
    pairs = {(i, j): pearson_exact(grid[i], grid[j]) for i in range(3) for j in range(3) if i < j}
    for i in range(3):
        want = np.mean([pairs[tuple(sorted((i, j)))] for j in range(3) if j != i])
        assert abs(got[i] - want) < 1e-12


def test_flat_and_missing_partners_are_skipped():
    rng = np.random.default_rng(5)
    a = rng.normal(80, 5, 40)
    grid = np.vstack([a, a + 1, np.full(40, 70.0), a])
    grid[3, 20] = np.nan
    r = mean_partner_correlation(grid, 30)
    # at t=39 the only valid partner of row 0 is row 1 (row 2 flat, row 3 has a gap)
    assert r[0, 39] == pytest.approx(1.0)
    assert np.isnan(r[2]).all()
    assert np.isnan(r[3, 20:50]).all()


def test_no_valid_partner_means_no_flag():
    grid = np.vstack([np.arange(40.0), np.full(40, 70.0)])
    flags, r = synchrony_flags(grid, 30)
    assert not flags.any() and np.isnan(r).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10), st.floats(-50, 50))
def test_correlation_affine_invariant(seed, a, b):
    rng = np.random.default_rng(seed)
    grid = rng.normal(80, 5, size=(3, 45))
    r = mean_partner_correlation(grid, 30)
    g2 = grid.copy()
    g2[1] = a * g2[1] + b
    r2 = mean_partner_correlation(g2, 30)
    ok = np.isfinite(r)
    assert (np.abs(r[ok]) <= 1).all()
    assert np.allclose(r[ok], r2[ok], atol=1e-9)
