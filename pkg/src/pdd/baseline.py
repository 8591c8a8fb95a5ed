"""Support/confidence baselines: Apriori and Apriori-Inverse.

Each record of a categorical table is a transaction holding exactly one
``attribute=value`` item per attribute. The transaction-level functions
accept any iterable of item collections whose items are sortable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Sequence

import numpy as np

from pdd.association import AvIndex
from pdd.discretize import DiscretizedTable
from pdd.errors import EmptyDataset, InconsistentInputs, UnknownTarget


@dataclass(frozen=True)
class Itemset:
    items: tuple
    count: int
    support: float

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class RuleRecord:
    antecedent: tuple
    consequent: Hashable
    support: float
    confidence: float


@dataclass(frozen=True)
class AprioriResult:
    itemsets: list[Itemset]
    rules: list[RuleRecord]
    fingerprint: str | None = None
    M: int = 0

    def __iter__(self):
        return iter((self.itemsets, self.rules))


def _count_matrix(transactions: Sequence[frozenset], items: Sequence) -> np.ndarray:
    col = {it: k for k, it in enumerate(items)}
    x = np.zeros((len(transactions), len(items)), dtype=bool)
    for r, t in enumerate(transactions):
        for it in t:
            x[r, col[it]] = True
    return x


def _levelwise(x: np.ndarray, keep, max_size: int | None, exclusive=None) -> dict[tuple, int]:
    """Generic levelwise search over column indices of the boolean matrix ``x``.

    ``keep(count)`` decides which itemsets survive a level; a candidate is
    generated only when all its (k-1)-subsets survived. ``exclusive(a, b)``
    marks item pairs that can never co-occur and are skipped up front.
    """
    counts = x.sum(axis=0)
    level = {(k,): int(c) for k, c in enumerate(counts) if keep(int(c))}
    found = dict(level)
    size = 1
    while level and (max_size is None or size < max_size):
        prev = sorted(level)
        prev_set = set(prev)
        cands = []
        for a, b in combinations(prev, 2):
            if a[:-1] != b[:-1]:
                continue
            if exclusive is not None and exclusive(a[-1], b[-1]):
                continue
            cand = a + (b[-1],)
            if all(sub in prev_set for sub in combinations(cand, size)):
                cands.append(cand)
        level = {}
        for cand in cands:
            c = int(np.count_nonzero(x[:, list(cand)].all(axis=1)))
            if keep(c):
                level[cand] = c
        found.update(level)
        size += 1
    return found


def apriori_transactions(
    transactions: Iterable[Iterable],
    minsup: float,
    minconf: float = 0.0,
    max_size: int | None = 2,
    exclusive=None,
) -> AprioriResult:
    """Frequent itemsets (support >= minsup) and single-consequent rules (confidence >= minconf)."""
    trans = [frozenset(t) for t in transactions]
    m = len(trans)
    if m == 0:
        raise EmptyDataset("apriori needs at least one transaction")
    if not 0 < minsup <= 1:
        raise ValueError("minsup must lie in (0, 1]")
    if not 0 <= minconf <= 1:
        raise ValueError("minconf must lie in [0, 1]")
    if max_size is not None and max_size < 1:
        raise ValueError("max_size must be >= 1")
    items = sorted(set().union(*trans))
    x = _count_matrix(trans, items)
    ex = None if exclusive is None else (lambda a, b: exclusive(items[a], items[b]))
    found = _levelwise(x, lambda c: c / m >= minsup, max_size, ex)

    keys = sorted(found, key=lambda k: (len(k), k))
    itemsets = [Itemset(tuple(items[k] for k in key), found[key], found[key] / m) for key in keys]
    rules = []
    for key in keys:
        if len(key) < 2:
            continue
        for pos, cons in enumerate(key):
            ante = key[:pos] + key[pos + 1:]
            conf = found[key] / found[ante]
            if conf >= minconf:
                rules.append(
                    RuleRecord(tuple(items[k] for k in ante), items[cons], found[key] / m, conf)
                )
    return AprioriResult(itemsets, rules, M=m)


def apriori_inverse_transactions(
    transactions: Iterable[Iterable],
    maxsup: float,
    min_count: int = 1,
    max_size: int | None = None,
    exclusive=None,
) -> list[Itemset]:
    """Perfectly rare itemsets.

    An itemset qualifies when its support is at most ``maxsup``, it occurs
    at least ``min_count`` times, and every proper subset also has support
    at most ``maxsup``.
    """
    trans = [frozenset(t) for t in transactions]
    m = len(trans)
    if m == 0:
        raise EmptyDataset("apriori-inverse needs at least one transaction")
    if not 0 < maxsup < 1:
        raise ValueError("maxsup must lie in (0, 1)")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    items = sorted(set().union(*trans))
    x = _count_matrix(trans, items)
    ex = None if exclusive is None else (lambda a, b: exclusive(items[a], items[b]))
    # the count floor is anti-monotone, so subsets of a kept itemset pass it too
    found = _levelwise(x, lambda c: c / m <= maxsup and c >= min_count, max_size, ex)
    keys = sorted(found, key=lambda k: (len(k), k))
    return [Itemset(tuple(items[k] for k in key), found[key], found[key] / m) for key in keys]


def table_transactions(table: DiscretizedTable) -> tuple[AvIndex, list[frozenset[int]]]:
    """Records as sets of AV indices."""
    index = AvIndex.from_table(table)
    offsets = {}
    off = 0
    for n in table.names:
        offsets[n] = off
        off += len(table.labels[n])
    codes = [table.codes(n) + offsets[n] for n in table.names]
    trans = [frozenset(int(c) for c in row) for row in zip(*codes)] if codes else []
    return index, trans


def _same_attribute(index: AvIndex):
    ids = index.attribute_ids()
    return lambda a, b: ids[a] == ids[b]


def _named(index: AvIndex, items: tuple) -> tuple:
    return tuple(index[i] for i in items)


def apriori(
    table: DiscretizedTable, minsup: float, minconf: float = 0.0, max_size: int | None = 2
) -> AprioriResult:
    """Apriori over a categorical table; items are ``(attribute, value)`` pairs."""
    index, trans = table_transactions(table)
    res = apriori_transactions(trans, minsup, minconf, max_size, _same_attribute(index))
    return AprioriResult(
        itemsets=[Itemset(_named(index, s.items), s.count, s.support) for s in res.itemsets],
        rules=[
            RuleRecord(_named(index, r.antecedent), index[r.consequent], r.support, r.confidence)
            for r in res.rules
        ],
        fingerprint=table.fingerprint(),
        M=res.M,
    )


def apriori_inverse(
    table: DiscretizedTable, maxsup: float, min_count: int = 1, max_size: int | None = 2
) -> list[Itemset]:
    index, trans = table_transactions(table)
    found = apriori_inverse_transactions(
        trans, maxsup, min_count, max_size, _same_attribute(index)
    )
    return [Itemset(_named(index, s.items), s.count, s.support) for s in found]


CRITERIA = ("support", "confidence", "ar", "rar")


@dataclass
class ComparisonReport:
    """Top-N target-linked pairs under each criterion.

    ``pooled`` ranks pairs across all target values together;
    ``per_target`` ranks the partners of each target value separately.
    ``minority_hits`` counts pooled top-N pairs whose target value is the
    least frequent one.
    """

    target: str
    top_n: int
    minority_value: str | None
    pooled: dict[str, list[tuple[str, tuple[str, str], float]]] = field(default_factory=dict)
    per_target: dict[str, dict[str, list[tuple[tuple[str, str], float]]]] = field(
        default_factory=dict
    )
    overlap: dict[str, float] = field(default_factory=dict)
    minority_hits: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "top_n": self.top_n,
            "minority_value": self.minority_value,
            "pooled": {
                c: [{"target_value": tv, "partner": list(av), "score": s} for tv, av, s in rows]
                for c, rows in self.pooled.items()
            },
            "per_target": {
                tv: {c: [{"partner": list(av), "score": s} for av, s in rows] for c, rows in d.items()}
                for tv, d in self.per_target.items()
            },
            "overlap": self.overlap,
            "minority_hits": self.minority_hits,
        }


def compare_criteria(kb, mined: AprioriResult, target: str, top_n: int = 20) -> ComparisonReport:
    """Rank target-linked pairs by support, confidence, AR and best RAR.

    Support and confidence come from the Apriori output (pairs it did not
    keep are absent from those rankings); AR and RAR come from the knowledge
    base. Confidence is read as P(target value | partner), the rule
    ``partner -> target value``.
    """
    if mined.fingerprint is not None and mined.fingerprint != kb.fingerprint:
        raise InconsistentInputs("apriori output and knowledge base come from different tables")
    index = kb.av_index
    values = index.values_of(target)
    if not values:
        raise UnknownTarget(f"unknown target attribute {target!r}")
    occ = kb.model.occ_single
    observed = [t for t in values if occ[t] > 0]
    minority = index[min(observed, key=lambda t: (occ[t], t))][1] if observed else None

    scores: dict[str, dict[tuple[str, tuple[str, str]], float]] = {c: {} for c in CRITERIA}
    for s in mined.itemsets:
        if len(s.items) == 2:
            tgt = [av for av in s.items if av[0] == target]
            if len(tgt) == 1:
                partner = s.items[0] if s.items[1] == tgt[0] else s.items[1]
                scores["support"][(tgt[0][1], partner)] = s.support
    for r in mined.rules:
        if len(r.antecedent) == 1 and r.consequent[0] == target and r.antecedent[0][0] != target:
            scores["confidence"][(r.consequent[1], r.antecedent[0])] = r.confidence
    rar_best = None
    if kb.spaces:
        rar_best = np.max(np.stack([s.rarv for s in kb.spaces]), axis=0)
    for t in values:
        for j, av in enumerate(index.entries):
            if av[0] == target:
                continue
            key = (index[t][1], av)
            scores["ar"][key] = float(kb.arv.values[t, j])
            if rar_best is not None:
                scores["rar"][key] = float(rar_best[t, j])

    def top(items):
        ranked = sorted(items, key=lambda kv: (-kv[1], kv[0]))
        return ranked[:top_n]

    report = ComparisonReport(target=target, top_n=top_n, minority_value=minority)
    if top_n <= 0:
        return report
    for c in CRITERIA:
        rows = top(scores[c].items())
        report.pooled[c] = [(tv, av, s) for (tv, av), s in rows]
        report.minority_hits[c] = sum(1 for tv, _, _ in report.pooled[c] if tv == minority)
    for t in values:
        tv = index[t][1]
        report.per_target[tv] = {
            c: [(av, s) for (_, av), s in top((k, v) for k, v in scores[c].items() if k[0] == tv)]
            for c in CRITERIA
        }
    for a, b in combinations(CRITERIA, 2):
        sa = {(tv, av) for tv, av, _ in report.pooled[a]}
        sb = {(tv, av) for tv, av, _ in report.pooled[b]}
        union = sa | sb
        report.overlap[f"{a}|{b}"] = len(sa & sb) / len(union) if union else 0.0
    return report
