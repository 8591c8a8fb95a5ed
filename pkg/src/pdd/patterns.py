"""Pattern groups, AVA classification and knowledge-base assembly.

Within one disentangled space an AV is *active* when it has at least one
cross-attribute RAR above tau. Active AVs split by loading sign into at most
two pattern groups (PG1 positive, PG2 negative). A group's sub-groups are
the connected components of its significant-RAR graph (or a greedy clique
partition in strict mode).

A cross-attribute pair is

* frequent when its best RAR over retained spaces exceeds tau and AR > tau;
* rare when its best RAR exceeds tau, AR < -tau and it co-occurs at least once;
* insignificant otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from pdd.association import ArvMatrix, AvIndex, ContingencyModel, is_degenerate
from pdd.config import FORMAT_VERSION, AnalysisConfig
from pdd.discretize import DiscretizedTable
from pdd.disentangle import DisentangledSpace, SpectralDecomposition
from pdd.errors import InvariantViolation, UnknownAv, UnknownTarget

FREQUENT, RARE, INSIGNIFICANT = "frequent", "rare", "insignificant"
POSITIVE, NEGATIVE = "positive", "negative"


@dataclass(frozen=True)
class PatternGroup:
    ds_id: int
    pg: int
    polarity: str
    members: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"DS{self.ds_id}_PG{self.pg}"


@dataclass(frozen=True)
class SubPatternGroup:
    ds_id: int
    pg: int
    sub: int
    members: tuple[int, ...]
    # singleton whose significant partners all sit in the opposite group
    cross_polarity: bool = False

    @property
    def name(self) -> str:
        return f"SubPG{self.sub}"

    @property
    def full_name(self) -> str:
        return f"DS{self.ds_id}_PG{self.pg}_SubPG{self.sub}"


@dataclass(frozen=True)
class AvaRecord:
    """One classified AV pair.

    ``confidence`` is con(av1 -> av2) = Occ(av1, av2) / Occ(av2); ``None``
    when av2 never occurs. In target tables av1 is the target value.
    """

    av1: tuple[str, str]
    av2: tuple[str, str]
    cooccurrence: int
    support: float
    confidence: float | None
    ar: float
    best_rar: float | None
    best_ds: int | None
    classification: str
    significant_in: tuple[int, ...] = ()
    degenerate: bool = False


def form_pattern_groups(
    spaces: Sequence[DisentangledSpace], tau: float
) -> list[PatternGroup]:
    groups = []
    for space in spaces:
        active = space.significant(tau).any(axis=1)
        u = space.loading
        for pg, polarity, side in ((1, POSITIVE, u > 0), (2, NEGATIVE, u < 0)):
            members = tuple(int(i) for i in np.flatnonzero(active & side))
            if members:
                groups.append(PatternGroup(space.ds_id, pg, polarity, members))
    return groups


def _components(members: Sequence[int], adj: np.ndarray) -> list[list[int]]:
    pos = {m: k for k, m in enumerate(members)}
    seen: set[int] = set()
    comps = []
    for start in members:
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for k in np.flatnonzero(adj[pos[node]]):
                nxt = members[k]
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(sorted(comp))
    return comps


def _cliques(members: Sequence[int], adj: np.ndarray) -> list[list[int]]:
    remaining = list(range(len(members)))
    out = []
    while remaining:
        clique = [remaining[0]]
        for k in remaining[1:]:
            if all(adj[k, c] for c in clique):
                clique.append(k)
        out.append([members[k] for k in clique])
        remaining = [k for k in remaining if k not in clique]
    return out


def form_subgroups(
    group: PatternGroup, space: DisentangledSpace, tau: float, mode: str = "components"
) -> list[SubPatternGroup]:
    """Split a pattern group into mutually significant sub-groups.

    ``mode="components"`` links members through any chain of significant
    RARs; ``mode="cliques"`` requires every pair inside a sub-group to be
    significant.
    """
    members = list(group.members)
    idx = np.array(members, dtype=np.int64)
    adj = space.significant(tau)[np.ix_(idx, idx)]
    if mode == "components":
        parts = _components(members, adj)
    elif mode == "cliques":
        parts = _cliques(members, adj)
    else:
        raise ValueError(f"unknown subgroup mode {mode!r}")
    parts.sort(key=lambda p: (-len(p), p[0]))
    return [
        SubPatternGroup(
            ds_id=group.ds_id,
            pg=group.pg,
            sub=n,
            members=tuple(p),
            cross_polarity=len(p) == 1,
        )
        for n, p in enumerate(parts, start=1)
    ]


def _classify(ar: float, best_rar: float | None, cooc: int, tau: float) -> str:
    if best_rar is None or not best_rar > tau:
        return INSIGNIFICANT
    if ar > tau:
        return FREQUENT
    if ar < -tau and cooc > 0:
        return RARE
    return INSIGNIFICANT


def classify_ava(
    pair: tuple[int, int],
    model: ContingencyModel,
    spaces: Sequence[DisentangledSpace],
    tau: float,
    formula: str = "standard",
) -> AvaRecord:
    i, j = pair
    index = model.av_index
    if index[i][0] == index[j][0]:
        raise ValueError("an AVA needs AVs of two different attributes")
    occ_i, occ_j, cooc = (int(model.occ_single[i]), int(model.occ_single[j]),
                          int(model.occ_pair[i, j]))
    degenerate = is_degenerate(occ_i, occ_j, model.M)
    ar = model.adjusted_residual(i, j, formula)
    best_rar, best_ds = None, None
    significant_in = []
    for space in spaces:
        r = float(space.rarv[i, j])
        if best_rar is None or r > best_rar:
            best_rar, best_ds = r, space.ds_id
        if r > tau:
            significant_in.append(space.ds_id)
    cls = INSIGNIFICANT if degenerate else _classify(ar, best_rar, cooc, tau)
    return AvaRecord(
        av1=index[i],
        av2=index[j],
        cooccurrence=cooc,
        support=model.support(i, j),
        confidence=None if occ_j == 0 else model.confidence(i, j),
        ar=ar,
        best_rar=best_rar,
        best_ds=best_ds,
        classification=cls,
        significant_in=tuple(significant_in),
        degenerate=degenerate,
    )


def classify_matrix(
    arv: ArvMatrix, occ_pair: np.ndarray, spaces: Sequence[DisentangledSpace], tau: float
) -> np.ndarray:
    """Classification of every cell as an object array; within-attribute cells get ``None``."""
    T = arv.T
    cross = arv.av_index.cross_mask()
    out = np.full((T, T), None, dtype=object)
    if T == 0:
        return out
    ar = arv.values
    if spaces:
        best = np.max(np.stack([s.rarv for s in spaces]), axis=0)
        gate = best > tau
    else:
        gate = np.zeros((T, T), dtype=bool)
    gate &= ~arv.degenerate
    out[cross] = INSIGNIFICANT
    out[cross & gate & (ar > tau)] = FREQUENT
    out[cross & gate & (ar < -tau) & (occ_pair > 0)] = RARE
    return out


@dataclass(frozen=True)
class PatternSection:
    ds_id: int
    pg: int
    sub: int
    records: tuple[AvaRecord, ...]

    @property
    def location(self) -> str:
        return f"DS{self.ds_id}_PG{self.pg}, SubPG{self.sub}"


@dataclass(frozen=True)
class TargetPatterns:
    attribute: str
    value: str
    count: int
    degenerate: bool
    frequent: tuple[PatternSection, ...] = ()
    rare: tuple[PatternSection, ...] = ()

    def records(self, kind: str) -> list[AvaRecord]:
        sections = self.frequent if kind == FREQUENT else self.rare
        return [r for s in sections for r in s.records]


def _sections(records: list[tuple[tuple[int, int, int], AvaRecord]]) -> tuple[PatternSection, ...]:
    buckets: dict[tuple[int, int, int], list[AvaRecord]] = {}
    for key, rec in records:
        buckets.setdefault(key, []).append(rec)
    return tuple(
        PatternSection(*key, records=tuple(sorted(recs, key=lambda r: (-abs(r.ar), r.av2))))
        for key, recs in sorted(buckets.items())
    )


def extract_target_patterns(
    model: ContingencyModel,
    spaces: Sequence[DisentangledSpace],
    subgroups: Sequence[SubPatternGroup],
    target: str,
    tau: float,
    formula: str = "standard",
) -> list[TargetPatterns]:
    """Frequent and rare partners of every value of ``target``.

    Each pair is filed under the pattern group and sub-group holding the
    target value in the space where the pair's RAR peaks; records inside a
    section run by descending |AR|.
    """
    index = model.av_index
    if target not in index.attributes:
        raise UnknownTarget(f"unknown target attribute {target!r}")
    home: dict[tuple[int, int], SubPatternGroup] = {}
    for sg in subgroups:
        for m in sg.members:
            home[(sg.ds_id, m)] = sg
    partners = [j for j, (a, _) in enumerate(index.entries) if a != target]

    out = []
    for t in index.values_of(target):
        count = int(model.occ_single[t])
        if count == 0:
            out.append(TargetPatterns(target, index[t][1], 0, degenerate=True))
            continue
        found: dict[str, list] = {FREQUENT: [], RARE: []}
        for j in partners:
            rec = classify_ava((t, j), model, spaces, tau, formula)
            if rec.classification == INSIGNIFICANT:
                continue
            sg = home.get((rec.best_ds, t))
            if sg is None:
                raise InvariantViolation(
                    f"{index.label(t)} is significant in DS{rec.best_ds} but in no sub-group"
                )
            found[rec.classification].append(((sg.ds_id, sg.pg, sg.sub), rec))
        out.append(
            TargetPatterns(
                attribute=target,
                value=index[t][1],
                count=count,
                degenerate=count == model.M,
                frequent=_sections(found[FREQUENT]),
                rare=_sections(found[RARE]),
            )
        )
    return out


def coverage(pattern: Iterable[tuple[str, str]], table: DiscretizedTable) -> frozenset[int]:
    """Ids of the records in which every AV of ``pattern`` holds."""
    mask = np.ones(table.M, dtype=bool)
    for attr, value in pattern:
        if attr not in table.labels or value not in table.labels[attr]:
            raise UnknownAv(f"unknown attribute value {attr}={value}")
        mask &= np.asarray(table.columns[attr]) == value
    return frozenset(int(i) for i in np.flatnonzero(mask))


@dataclass(frozen=True)
class KnowledgeBase:
    fingerprint: str
    config: AnalysisConfig
    target: str
    attributes: tuple[dict[str, Any], ...]
    provenance: Mapping[str, Any]
    model: ContingencyModel
    arv: ArvMatrix
    eigenvalues: np.ndarray
    spaces: tuple[DisentangledSpace, ...]
    groups: tuple[PatternGroup, ...]
    subgroups: tuple[SubPatternGroup, ...]
    targets: tuple[TargetPatterns, ...]
    coverage: Mapping[tuple[tuple[str, str], ...], tuple[int, ...]]
    counts: Mapping[str, int] = field(default_factory=dict)
    dropped: int = 0
    format_version: str = FORMAT_VERSION

    @property
    def av_index(self) -> AvIndex:
        return self.model.av_index

    @property
    def M(self) -> int:
        return self.model.M

    def target_records(self, kind: str) -> list[AvaRecord]:
        return [r for tp in self.targets for r in tp.records(kind)]


def _check_kb(kb: KnowledgeBase, tau: float) -> None:
    index = kb.av_index
    space_ids = {s.ds_id for s in kb.spaces}
    for g in kb.groups:
        if g.ds_id not in space_ids:
            raise InvariantViolation(f"{g.name} refers to a space that was not retained")
    for kind in (FREQUENT, RARE):
        for rec in kb.target_records(kind):
            i, j = index.index(*rec.av1), index.index(*rec.av2)
            if int(kb.model.occ_pair[i, j]) != rec.cooccurrence:
                raise InvariantViolation(f"stale co-occurrence for {rec.av1}/{rec.av2}")
            if not rec.best_rar > tau:
                raise InvariantViolation(f"{kind} pattern without a significant RAR")
            if kind == FREQUENT and not rec.ar > tau:
                raise InvariantViolation("frequent pattern with AR <= tau")
            if kind == RARE and not (rec.ar < -tau and rec.cooccurrence > 0):
                raise InvariantViolation("rare pattern violating AR < -tau or zero frequency")
            if len(kb.coverage.get((rec.av1, rec.av2), ())) != rec.cooccurrence:
                raise InvariantViolation(f"coverage of {rec.av1}/{rec.av2} disagrees with counts")


def assemble_kb(
    table: DiscretizedTable,
    model: ContingencyModel,
    arv: ArvMatrix,
    decomp: SpectralDecomposition,
    spaces: Sequence[DisentangledSpace],
    groups: Sequence[PatternGroup],
    subgroups: Sequence[SubPatternGroup],
    targets: Sequence[TargetPatterns],
    config: AnalysisConfig,
) -> KnowledgeBase:
    target = targets[0].attribute if targets else table.target
    cov = {}
    for tp in targets:
        for kind in (FREQUENT, RARE):
            for rec in tp.records(kind):
                key = (rec.av1, rec.av2)
                cov[key] = tuple(sorted(coverage(key, table)))
    classes = classify_matrix(arv, model.occ_pair, spaces, config.tau)
    upper = np.triu(np.ones_like(classes, dtype=bool), 1)
    counts = {c: int(np.sum((classes == c) & upper)) for c in (FREQUENT, RARE, INSIGNIFICANT)}
    kb = KnowledgeBase(
        fingerprint=table.fingerprint(),
        config=config,
        target=target,
        attributes=tuple(
            {"name": n, "role": table.roles.get(n, "feature"), "labels": list(table.labels[n])}
            for n in table.names
        ),
        provenance=dict(table.provenance),
        model=model,
        arv=arv,
        eigenvalues=decomp.eigenvalues.copy(),
        spaces=tuple(spaces),
        groups=tuple(groups),
        subgroups=tuple(subgroups),
        targets=tuple(targets),
        coverage=cov,
        counts=counts,
        dropped=table.dropped,
    )
    _check_kb(kb, config.tau)
    return kb
