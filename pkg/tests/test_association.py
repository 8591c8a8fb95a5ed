import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.stats.contingency_tables import Table

from pdd.association import (
    AvIndex,
    adjusted_residual,
    build_arv,
    build_contingency,
    confidence,
    expected,
    support,
)
from pdd.discretize import DiscretizedTable
from pdd.errors import EmptyDataset, UnknownAv, ZeroSupportCondition

from conftest import make_table, random_table


def test_hand_counts(four_records):
    index, model = build_contingency(four_records)
    a1, b1 = index.index("A", "a1"), index.index("B", "b1")
    assert index.entries == (("A", "a1"), ("A", "a2"), ("B", "b1"), ("B", "b2"))
    assert model.occ_single[a1] == 3
    assert model.occ_pair[a1, b1] == 2 == model.occ_pair[b1, a1]
    assert model.M == 4
    assert model.support(a1, b1) == 0.5
    assert model.confidence(b1, a1) == pytest.approx(2 / 3)


def test_empty_table_counts():
    t = DiscretizedTable(names=("A", "B"), labels={"A": ("x",), "B": ("y", "z")},
                         columns={"A": (), "B": ()})
    index, model = build_contingency(t)
    assert model.M == 0
    assert not model.occ_single.any() and not model.occ_pair.any()
    with pytest.raises(EmptyDataset):
        build_arv(index, model)


def test_single_attribute_has_no_pairs():
    t = make_table([("x",), ("y",), ("x",)], ["A"])
    index, model = build_contingency(t)
    assert not model.occ_pair.any()
    assert not index.cross_mask().any()
    arv = build_arv(index, model)
    assert not arv.values.any()


def test_support_definition():
    assert support(5, 20) == 0.25
    assert support(0, 20) == 0.0
    with pytest.raises(EmptyDataset):
        support(1, 0)


def test_confidence_definition():
    # sup(pair)=0.25, sup(av2)=0.5 with M=20
    assert confidence(5, 10) == 0.5
    assert confidence(7, 7) == 1.0
    assert confidence(2, 8) == 0.25
    with pytest.raises(ZeroSupportCondition):
        confidence(0, 0)


def test_expected_definition():
    assert expected(50, 50, 100) == 25
    assert expected(10, 4, 20) == 2
    assert expected(0, 7, 20) == 0
    with pytest.raises(EmptyDataset):
        expected(1, 1, 0)


def statsmodels_ar(o11, occ1, occ2, m):
    """Adjusted residual of cell (1,1) of the 2x2 table built from margins."""
    grid = np.array([[o11, occ1 - o11], [occ2 - o11, m - occ1 - occ2 + o11]], dtype=float)
    return Table(grid, shift_zeros=False).standardized_resids[0, 0]


def test_independence_gives_zero():
    assert adjusted_residual(25, 50, 50, 100) == 0.0


def test_hand_values_and_oracle():
    assert adjusted_residual(40, 50, 50, 100) == pytest.approx(6.0, abs=1e-12)
    assert statsmodels_ar(40, 50, 50, 100) == pytest.approx(6.0, abs=1e-9)
    want = -4 / math.sqrt(5 * 0.5 * 0.5)
    assert adjusted_residual(1, 10, 10, 20) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(-3.5777, abs=1e-4)
    assert statsmodels_ar(1, 10, 10, 20) == pytest.approx(want, abs=1e-9)


def test_literal_formula_switch():
    # (O - E) / sqrt(E) * (1 - p1 * p2)
    assert adjusted_residual(40, 50, 50, 100, "literal") == pytest.approx(15 / 5 * 0.75)
    with pytest.raises(ValueError):
        adjusted_residual(40, 50, 50, 100, "other")


def test_degenerate_margin_is_zero():
    assert adjusted_residual(0, 0, 5, 10) == 0.0
    assert adjusted_residual(5, 10, 5, 10) == 0.0


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 200).flatmap(
    lambda m: st.tuples(st.just(m), st.integers(1, m - 1), st.integers(1, m - 1))
).flatmap(
    lambda t: st.tuples(st.just(t[0]), st.just(t[1]), st.just(t[2]),
                        st.integers(max(0, t[1] + t[2] - t[0]), min(t[1], t[2])))
))
def test_ar_matches_statsmodels(args):
    m, occ1, occ2, o11 = args
    ar = adjusted_residual(o11, occ1, occ2, m)
    assert ar == pytest.approx(statsmodels_ar(o11, occ1, occ2, m), abs=1e-9)
    # sign agreement
    e = occ1 * occ2 / m
    assert (ar > 0) == (o11 > e + 1e-12) or abs(o11 - e) < 1e-12


def brute_force_arv(table):
    """Record-by-record counting, scalar formula, one cell at a time."""
    avs = [(n, v) for n in table.names for v in table.labels[n]]
    m = table.M
    out = np.zeros((len(avs), len(avs)))
    for i, (a, x) in enumerate(avs):
        for j, (b, y) in enumerate(avs):
            if a == b:
                continue
            o1 = sum(1 for r in range(m) if table.columns[a][r] == x)
            o2 = sum(1 for r in range(m) if table.columns[b][r] == y)
            o = sum(1 for r in range(m) if table.columns[a][r] == x and table.columns[b][r] == y)
            if 0 < o1 < m and 0 < o2 < m:
                e = o1 * o2 / m
                out[i, j] = (o - e) / math.sqrt(e * (1 - o1 / m) * (1 - o2 / m))
    return out


def test_arv_structure_two_binary_attributes(four_records):
    index, model = build_contingency(four_records)
    arv = build_arv(index, model)
    assert arv.values.shape == (4, 4)
    assert not arv.values[:2, :2].any() and not arv.values[2:, 2:].any()
    assert np.array_equal(arv.values, arv.values.T)
    np.testing.assert_allclose(arv.values, brute_force_arv(four_records), atol=1e-12, rtol=0)


def test_arv_six_record_fixture():
    t = make_table(
        [("a1", "b1", "c1"), ("a1", "b1", "c2"), ("a1", "b2", "c1"),
         ("a2", "b2", "c2"), ("a2", "b3", "c2"), ("a1", "b1", "c1")],
        ["A", "B", "C"],
    )
    index, model = build_contingency(t)
    arv = build_arv(index, model)
    np.testing.assert_allclose(arv.values, brute_force_arv(t), atol=1e-12, rtol=0)
    # a1-b1: O=3, Occ 4 and 3, M=6 -> E=2, AR=1/sqrt(2*(1/3)*(1/2))
    i, j = index.index("A", "a1"), index.index("B", "b1")
    assert arv.values[i, j] == pytest.approx(1 / math.sqrt(2 / 6))


def test_empty_index():
    index = AvIndex(entries=())
    t = DiscretizedTable(names=(), labels={}, columns={})
    idx, model = build_contingency(t)
    arv = build_arv(idx, model)
    assert arv.values.shape == (0, 0)
    with pytest.raises(UnknownAv):
        index.index("A", "x")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_contingency_invariants(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, int(rng.integers(1, 60)), int(rng.integers(2, 5)), 4)
    index, model = build_contingency(t)
    arv = build_arv(index, model)
    attr = index.attribute_ids()
    occ, pair = model.occ_single, model.occ_pair
    for a in range(len(t.names)):
        assert occ[attr == a].sum() == t.M
    for i in range(index.T):
        for b in range(len(t.names)):
            if b == attr[i]:
                continue
            cols = attr == b
            assert pair[i, cols].sum() == occ[i]
            resid = pair[i, cols] - occ[i] * occ[cols] / t.M
            assert abs(resid.sum()) < 1e-9
            assert np.all(pair[i, cols] / t.M <= np.minimum(occ[i], occ[cols]) / t.M)
    assert np.array_equal(pair, pair.T)
    assert np.array_equal(arv.values, arv.values.T)
    assert not arv.values[~index.cross_mask()].any()
    assert np.trace(arv.values) == 0
    assert np.all(np.isfinite(arv.values))
    live = index.cross_mask() & ~arv.degenerate
    expect = occ[:, None] * occ[None, :] / t.M
    off = live & ~np.isclose(pair, expect)
    assert np.array_equal(arv.values[off] > 0, pair[off] > expect[off])
