import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdd.association import ArvMatrix, AvIndex, adjusted_residual, build_contingency
from pdd.config import AnalysisConfig
from pdd.disentangle import DisentangledSpace
from pdd.errors import UnknownAv, UnknownTarget
from pdd.patterns import (
    FREQUENT,
    INSIGNIFICANT,
    RARE,
    PatternGroup,
    classify_matrix,
    coverage,
    extract_target_patterns,
    form_pattern_groups,
    form_subgroups,
)
from pdd.pipeline import analyze
from pdd.report import dumps_kb
from pdd.synth import Block, GeneratorSpec, generate

from conftest import make_table, random_table

TAU = 1.96


def singleton_index(n):
    return AvIndex(entries=tuple((f"A{i}", "x") for i in range(n)))


def space_from(rarv, loading=None, ds_id=1):
    rarv = np.asarray(rarv, dtype=float)
    n = rarv.shape[0]
    if loading is None:
        loading = np.ones(n)
    return DisentangledSpace(ds_id, 1.0, np.asarray(loading, float), rarv, singleton_index(n))


def test_sign_partition():
    u = np.array([0.5, 0.5, -0.5, -0.5])
    s = DisentangledSpace(1, 40.0, u, 40.0 * np.outer(u, u), singleton_index(4))
    groups = form_pattern_groups([s], TAU)
    assert [(g.name, g.polarity, g.members) for g in groups] == [
        ("DS1_PG1", "positive", (0, 1)),
        ("DS1_PG2", "negative", (2, 3)),
    ]


def test_center_exclusion():
    u = np.array([0.7, 0.7, 1e-6])
    s = DisentangledSpace(2, 40.0, u, 40.0 * np.outer(u, u), singleton_index(3))
    groups = form_pattern_groups([s], TAU)
    assert [g.members for g in groups] == [(0, 1)]
    assert groups[0].name == "DS2_PG1"


def test_subgroups_complete_graph():
    s = space_from(np.full((4, 4), 5.0))
    subs = form_subgroups(PatternGroup(1, 1, "positive", (0, 1, 2, 3)), s, TAU)
    assert [sg.members for sg in subs] == [(0, 1, 2, 3)]
    assert subs[0].name == "SubPG1" and subs[0].full_name == "DS1_PG1_SubPG1"


def test_subgroups_two_cliques():
    r = np.zeros((4, 4))
    r[0, 1] = r[1, 0] = r[2, 3] = r[3, 2] = 5.0
    s = space_from(r)
    subs = form_subgroups(PatternGroup(1, 1, "positive", (0, 1, 2, 3)), s, TAU)
    assert [sg.members for sg in subs] == [(0, 1), (2, 3)]


def test_subgroups_chain_components_vs_cliques():
    r = np.zeros((3, 3))
    r[0, 1] = r[1, 0] = 3.0
    r[1, 2] = r[2, 1] = 3.0
    r[0, 2] = r[2, 0] = 1.0
    s = space_from(r)
    g = PatternGroup(1, 1, "positive", (0, 1, 2))
    assert [sg.members for sg in form_subgroups(g, s, TAU)] == [(0, 1, 2)]
    strict = form_subgroups(g, s, TAU, mode="cliques")
    assert [sg.members for sg in strict] == [(0, 1), (2,)]
    assert strict[1].cross_polarity


def classify_cells(ar_values, best_rar, cooc):
    n = len(ar_values)
    T = 2 * n
    index = AvIndex(entries=tuple((a, f"v{k}") for a in ("A", "B") for k in range(n)))
    values = np.zeros((T, T))
    rarv = np.zeros((T, T))
    occ = np.zeros((T, T), dtype=np.int64)
    for k, (ar, rar, c) in enumerate(zip(ar_values, best_rar, cooc)):
        i, j = k, n + k
        values[i, j] = values[j, i] = ar
        rarv[i, j] = rarv[j, i] = rar
        occ[i, j] = occ[j, i] = c
    arv = ArvMatrix(values, index, np.zeros((T, T), dtype=bool))
    space = DisentangledSpace(1, 1.0, np.ones(T), rarv, index)
    cls = classify_matrix(arv, occ, [space], TAU)
    return [cls[k, n + k] for k in range(n)]


def test_classification_definitions():
    got = classify_cells([3.0, -3.0, 2.5, -3.0, 0.0], [5.0, 5.0, 1.5, 5.0, 5.0], [9, 2, 9, 0, 9])
    assert got == [FREQUENT, RARE, INSIGNIFICANT, INSIGNIFICANT, INSIGNIFICANT]


def minority_fixture(seed=7, m=20000, p_in=0.9):
    attrs = tuple((f"F{k}", ("x", "y", "z")) for k in range(8))
    spec = GeneratorSpec(
        M=m,
        attributes=attrs,
        proportions=(0.883, 0.117),
        blocks=(Block("minority", (("F0", "x"), ("F1", "y"), ("F2", "z")), p_in),),
        seed=seed,
    )
    return generate(spec)


def test_planted_minority_partners_are_frequent():
    table, truth = minority_fixture()
    kb = analyze(table)
    tp = {t.value: t for t in kb.targets}["minority"]
    frequent = {r.av2 for r in tp.records(FREQUENT)}
    assert {("F0", "x"), ("F1", "y"), ("F2", "z")} <= frequent
    for sec in tp.frequent:
        ars = [abs(r.ar) for r in sec.records]
        assert ars == sorted(ars, reverse=True)
        assert sec.location.startswith(f"DS{sec.ds_id}_PG{sec.pg}, SubPG")


def test_planted_blocks_land_inside_one_group():
    attrs = tuple((f"F{k}", ("p", "q", "r")) for k in range(6))
    spec = GeneratorSpec(
        M=6000, attributes=attrs, target="Cls", target_values=("a", "b", "c"),
        proportions=(0.5, 0.3, 0.2),
        blocks=(Block("b", (("F0", "p"), ("F1", "p"), ("F2", "p")), 0.95),
                Block("c", (("F3", "q"), ("F4", "q"), ("F5", "q")), 0.95)),
        seed=5,
    )
    table, truth = generate(spec)
    kb = analyze(table)
    index = kb.av_index
    for blk in truth.blocks:
        avs = {index.index(*blk[0][0])} | {index.index(*p) for _, p in blk}
        assert any(avs <= set(g.members) for g in kb.groups)


def test_zero_count_target_value_is_degenerate():
    t = make_table([("u", "p"), ("v", "q"), ("u", "q"), ("v", "p")], ["T", "X"],
                   labels={"T": ("u", "v", "w"), "X": ("p", "q")})
    _, model = build_contingency(t)
    out = extract_target_patterns(model, [], [], "T", TAU)
    w = [tp for tp in out if tp.value == "w"][0]
    assert w.degenerate and w.count == 0 and not w.frequent and not w.rare
    with pytest.raises(UnknownTarget):
        extract_target_patterns(model, [], [], "Nope", TAU)


def test_coverage_examples(four_records):
    assert coverage([("A", "a1")], four_records) == {0, 1, 2}
    assert coverage([("A", "a1"), ("B", "b1")], four_records) == {0, 1}
    assert coverage([("A", "a1"), ("A", "a2")], four_records) == frozenset()
    with pytest.raises(UnknownAv):
        coverage([("C", "c1")], four_records)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_coverage_sound_and_complete(seed):
    rng = np.random.default_rng(seed)
    t = random_table(rng, int(rng.integers(1, 40)), 3, 3)
    pattern = [(n, t.labels[n][int(rng.integers(len(t.labels[n])))]) for n in t.names[:2]]
    got = coverage(pattern, t)
    want = {r for r in range(t.M) if all(t.columns[a][r] == v for a, v in pattern)}
    assert got == want


def test_end_to_end_kb_checks_and_determinism():
    table, _ = minority_fixture(seed=3, m=5000)
    kb = analyze(table)
    assert kb.spaces
    index = kb.av_index
    for kind in (FREQUENT, RARE):
        for rec in kb.target_records(kind):
            i, j = index.index(*rec.av1), index.index(*rec.av2)
            o, oi, oj = (int(kb.model.occ_pair[i, j]), int(kb.model.occ_single[i]),
                         int(kb.model.occ_single[j]))
            assert rec.support == pytest.approx(o / kb.M, abs=1e-9)
            assert rec.confidence == pytest.approx(o / oj, abs=1e-9)
            assert rec.ar == pytest.approx(adjusted_residual(o, oi, oj, kb.M), abs=1e-9)
            assert len(kb.coverage[(rec.av1, rec.av2)]) == o
    assert dumps_kb(analyze(table)) == dumps_kb(kb)


def test_no_retained_spaces_keeps_statistics():
    table, _ = minority_fixture(seed=3, m=2000)
    kb = analyze(table, config=AnalysisConfig(tau=1e9))
    assert kb.spaces == () and kb.groups == ()
    assert all(not tp.frequent and not tp.rare for tp in kb.targets)
    assert kb.model.occ_single.sum() == kb.M * len(table.names)
    assert kb.counts[FREQUENT] == kb.counts[RARE] == 0


def test_partition_and_disjointness():
    table, _ = minority_fixture(seed=11, m=5000)
    kb = analyze(table)
    cls = classify_matrix(kb.arv, kb.model.occ_pair, kb.spaces, TAU)
    cross = kb.av_index.cross_mask()
    assert set(cls[cross].tolist()) <= {FREQUENT, RARE, INSIGNIFICANT}
    assert all(v is None for v in cls[~cross])
    total = sum(kb.counts.values())
    assert total == cross.sum() // 2
    freq = {(r.av1, r.av2) for r in kb.target_records(FREQUENT)}
    rare = {(r.av1, r.av2) for r in kb.target_records(RARE)}
    assert not freq & rare


@pytest.mark.parametrize("seed", range(5))
def test_majority_block_found_in_earlier_space(seed):
    attrs = tuple((f"F{k}", ("x", "y", "z")) for k in range(8))
    spec = GeneratorSpec(
        M=20000, attributes=attrs, proportions=(0.883, 0.117),
        blocks=(Block("majority", (("F0", "x"), ("F1", "x")), 0.7),
                Block("minority", (("F4", "y"), ("F5", "y")), 0.9)),
        seed=seed,
    )
    table, truth = generate(spec)
    kb = analyze(table)
    best = {}
    for tp in kb.targets:
        for rec in tp.records(FREQUENT):
            best[(rec.av1, rec.av2)] = rec.best_ds
    maj = [best[(t, p)] for t, p in truth.blocks[0]]
    mino = [best[(t, p)] for t, p in truth.blocks[1]]
    assert max(maj) <= min(mino)
