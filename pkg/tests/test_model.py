import pytest
from hypothesis import given, strategies as st

from mmfuse.model import (IndicatorCatalog, IntervalRecord, Measure, Modality, Outcome, OutcomeGroups,
                          Survey, ZoneSpec, check_records, default_catalog, records_matrix)

CODES = default_catalog().names


def test_catalog_size_and_modalities(catalog):
    assert len(catalog) == 17
    counts = tuple(len(catalog.by_modality(m)) for m in (Modality.SPATIAL, Modality.VERBAL,
                                                          Modality.PHYSIOLOGICAL))
    assert counts == (8, 7, 2)


def test_catalog_lookup(catalog):
    assert catalog.lookup("PY.arousal") == 15
    assert catalog.lookup("SP.collaborate.primary") == 0
    assert "VB.agreement" in catalog
    assert "VB.greeting" not in catalog
    with pytest.raises(KeyError):
        catalog.lookup("VB.greeting")


def test_catalog_roundtrip_keeps_order(catalog):
    again = IndicatorCatalog.from_dict(catalog.to_dict())
    assert again.names == catalog.names
    assert [i.modality for i in again] == [i.modality for i in catalog]


def test_catalog_rejects_duplicates():
    with pytest.raises(ValueError):
        IndicatorCatalog.from_codes([("A", "Spatial"), ("A", "Verbal")])


@given(st.sets(st.sampled_from(CODES)))
def test_record_weight_equals_presence_count(present):
    r = IntervalRecord.from_presence("S", "s1", 0, present)
    assert sum(r.values) == len(present)
    assert len(r.values) == 17
    assert set(r.present()) == present


def test_record_rejects_non_binary():
    with pytest.raises(ValueError):
        IntervalRecord("S", "s1", 0, (0, 2) + (0,) * 15)
    with pytest.raises(ValueError):
        IntervalRecord("S", "s1", -1, (0,) * 17)


def test_check_records():
    a = IntervalRecord("S", "s1", 0, (0,) * 17)
    b = IntervalRecord("S", "s1", 2, (0,) * 17)
    with pytest.raises(ValueError):
        check_records([a, a])
    with pytest.raises(ValueError):
        check_records([a, b])
    check_records([a, IntervalRecord("S", "s1", 1, (1,) * 17)])
    assert records_matrix([a]).shape == (1, 17)


def test_zone_radius_positive():
    with pytest.raises(ValueError):
        ZoneSpec("Z", (0, 0), 0.0)
    z = ZoneSpec("Z", (1, 2), 1.5, "secondary")
    assert z.task_type.value == "secondary"


@given(st.dictionaries(st.text(min_size=1, max_size=4), st.integers(1, 7), min_size=1))
def test_outcome_partition(ratings):
    g = OutcomeGroups.from_ratings(ratings, "task")
    sat = set(g.members(Outcome.SATISFIED))
    uns = set(g.members(Outcome.UNSATISFIED))
    assert sat | uns == set(ratings)
    assert not sat & uns
    assert all((ratings[u] >= 4) == (u in sat) for u in ratings)


def test_outcome_from_surveys_threshold():
    s = {"a": Survey(4, 3), "b": Survey(3, 7)}
    task = OutcomeGroups.from_surveys(s, Measure.TASK)
    assert task.membership == {"a": Outcome.SATISFIED, "b": Outcome.UNSATISFIED}
    collab = OutcomeGroups.from_surveys(s, "collab", threshold=5)
    assert collab.membership == {"a": Outcome.UNSATISFIED, "b": Outcome.SATISFIED}
