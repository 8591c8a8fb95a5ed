"""Turn ordinal and numerical attributes into finite label sets.

Three binning modes are supported:

* ``level_map``: regroup ordinal source labels into coarser target labels.
* ``equal_frequency``: choose ``k - 1`` cutpoints so the bins hold roughly
  the same number of records.
* ``explicit_cutpoints``: caller-supplied boundaries.

Numeric bins are half-open ``[c_{j-1}, c_j)``; a value equal to a cutpoint
falls in the upper bin. Equal-frequency cutpoints are midpoints between
adjacent distinct values, so observed data never sits on a boundary.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence

import numpy as np

from pdd.errors import (
    InvalidValue,
    MissingBinSpec,
    PDDError,
    SchemaParseError,
    TooFewDistinct,
    UnmappedLevel,
)

if TYPE_CHECKING:
    from pdd.schema import AttributeSchema, DatasetTable

MODES = ("level_map", "equal_frequency", "explicit_cutpoints")


@dataclass(frozen=True)
class BinSpec:
    mode: str
    level_map: Mapping[str, str] | None = None
    k: int | None = None
    cutpoints: tuple[float, ...] | None = None
    bin_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise SchemaParseError(f"unknown discretization mode {self.mode!r}")
        if self.mode == "level_map":
            if not self.level_map:
                raise SchemaParseError("level_map mode needs a non-empty level_map")
            if self.bin_labels is not None and set(self.bin_labels) != set(
                self.level_map.values()
            ):
                raise SchemaParseError("bin_labels must list exactly the level_map targets")
        elif self.mode == "equal_frequency":
            if self.k is None or self.k < 2:
                raise SchemaParseError("equal_frequency needs k >= 2")
            if self.bin_labels is not None and len(self.bin_labels) != self.k:
                raise SchemaParseError(f"expected {self.k} bin labels, got {len(self.bin_labels)}")
        else:
            cuts = self.cutpoints
            if not cuts:
                raise SchemaParseError("explicit_cutpoints needs at least one cutpoint")
            if any(b <= a for a, b in zip(cuts, cuts[1:])):
                raise SchemaParseError(f"cutpoints must be strictly increasing: {list(cuts)}")
            if self.bin_labels is not None and len(self.bin_labels) != len(cuts) + 1:
                raise SchemaParseError(
                    f"expected {len(cuts) + 1} bin labels, got {len(self.bin_labels)}"
                )

    @property
    def target_labels(self) -> tuple[str, ...]:
        """Ordered output labels of a level map."""
        if self.bin_labels is not None:
            return self.bin_labels
        return tuple(dict.fromkeys(self.level_map.values()))

    def check_covers(self, source_values: Sequence[str], attribute: str = "?") -> None:
        keys = set(self.level_map)
        missing = [v for v in source_values if v not in keys]
        if missing:
            raise UnmappedLevel(f"attribute {attribute!r}: no level_map entry for {missing}")
        extra = sorted(keys - set(source_values))
        if extra:
            raise SchemaParseError(
                f"attribute {attribute!r}: level_map keys {extra} are not allowed values"
            )

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any], attribute: str = "?") -> "BinSpec":
        if not isinstance(doc, Mapping) or "mode" not in doc:
            raise SchemaParseError(f"attribute {attribute!r}: discretization needs a 'mode'")
        labels = doc.get("labels")
        level_map = doc.get("level_map")
        cuts = doc.get("cutpoints")
        try:
            return cls(
                mode=str(doc["mode"]),
                level_map=None
                if level_map is None
                else {str(k): str(v) for k, v in level_map.items()},
                k=None if doc.get("k") is None else int(doc["k"]),
                cutpoints=None if cuts is None else tuple(float(c) for c in cuts),
                bin_labels=None if labels is None else tuple(str(x) for x in labels),
            )
        except SchemaParseError as exc:
            raise SchemaParseError(f"attribute {attribute!r}: {exc}") from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise SchemaParseError(f"attribute {attribute!r}: bad discretization: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"mode": self.mode}
        if self.level_map is not None:
            out["level_map"] = dict(self.level_map)
        if self.k is not None:
            out["k"] = self.k
        if self.cutpoints is not None:
            out["cutpoints"] = list(self.cutpoints)
        if self.bin_labels is not None:
            out["labels"] = list(self.bin_labels)
        return out


def _midpoint(a: float, b: float) -> float:
    """Cut between a < b that keeps a below and b above under bisect_right."""
    m = a / 2.0 + b / 2.0
    return m if a < m <= b else b


def equal_frequency_cutpoints(values: Iterable[float], k: int) -> tuple[float, ...]:
    """Cutpoints splitting ``values`` into ``k`` bins of near-equal size.

    Each ideal split rank ``j * n / k`` is moved to the nearest position
    between two distinct sorted values (the smaller position wins a tie), so
    duplicates never straddle a boundary. When two splits would land on the
    same position the later one takes the nearest free position to its right.

    Raises:
        TooFewDistinct: ``k`` exceeds the number of distinct values.
    """
    v = np.sort(np.asarray(list(values), dtype=float))
    n = v.size
    if k < 2:
        raise ValueError("k must be >= 2")
    if n == 0:
        raise TooFewDistinct("no values to discretize")
    # position p splits v[:p] | v[p:]
    bounds = np.flatnonzero(v[1:] > v[:-1]) + 1
    if bounds.size < k - 1:
        raise TooFewDistinct(f"{bounds.size + 1} distinct values cannot fill {k} bins")

    cuts = []
    lo = 0
    for j in range(1, k):
        rank = j * n / k
        hi = bounds.size - (k - 1 - j)
        window = bounds[lo:hi]
        best = lo + int(np.argmin(np.abs(window - rank)))  # argmin keeps the first tie
        p = int(bounds[best])
        cuts.append(_midpoint(float(v[p - 1]), float(v[p])))
        lo = best + 1
    return tuple(cuts)


def bin_index(value: float, cutpoints: Sequence[float]) -> int:
    return bisect_right(cutpoints, value)


def apply_level_map(values: Iterable[str], level_map: Mapping[str, str]) -> list[str]:
    out = []
    for v in values:
        try:
            out.append(level_map[v])
        except KeyError:
            raise UnmappedLevel(f"no level_map entry for source value {v!r}") from None
    return out


def _num(x: float) -> str:
    return "%.15g" % x


def interval_label(lo: float, hi: float) -> str:
    return f"[{_num(lo)},{_num(hi)}]"


@dataclass(frozen=True)
class DiscretizedTable:
    """Fully categorical table.

    ``labels`` holds each attribute's ordered final label set; ``columns``
    holds per-record labels. ``roles`` carries the schema role flags, which
    no statistic depends on.
    """

    names: tuple[str, ...]
    labels: Mapping[str, tuple[str, ...]]
    columns: Mapping[str, tuple[str, ...]]
    roles: Mapping[str, str] = field(default_factory=dict)
    provenance: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    dropped: int = 0

    def __post_init__(self):
        for n in self.names:
            allowed = set(self.labels[n])
            bad = set(self.columns[n]) - allowed
            if bad:
                raise InvalidValue(f"column {n!r}: values {sorted(bad)} not in label set", column=n)

    @property
    def M(self) -> int:
        return len(self.columns[self.names[0]]) if self.names else 0

    @property
    def record_ids(self) -> range:
        return range(self.M)

    @property
    def target(self) -> str | None:
        for n in self.names:
            if self.roles.get(n) == "target":
                return n
        return None

    def with_target(self, name: str | None) -> "DiscretizedTable":
        """Copy with the target flag moved to ``name`` (``None`` clears it)."""
        roles = {n: ("target" if n == name else "feature") for n in self.names}
        return replace(self, roles=roles)

    def codes(self, name: str) -> np.ndarray:
        """Per-record index of each value into ``labels[name]``."""
        lookup = {lab: i for i, lab in enumerate(self.labels[name])}
        return np.fromiter((lookup[v] for v in self.columns[name]), dtype=np.int64, count=self.M)

    def fingerprint(self) -> str:
        """Content hash over names, label sets and cells; ignores role flags."""
        h = hashlib.sha256()
        h.update(json.dumps([[n, list(self.labels[n])] for n in self.names]).encode())
        for n in self.names:
            h.update(b"\x00")
            h.update("\x1f".join(self.columns[n]).encode())
        return h.hexdigest()

    def schema(self) -> list["AttributeSchema"]:
        """Categorical schema that re-ingests the emitted table unchanged."""
        from pdd.schema import AttributeSchema

        return [
            AttributeSchema(
                name=n,
                kind="categorical",
                role=self.roles.get(n, "feature"),
                allowed_values=tuple(self.labels[n]),
                missing_tokens=frozenset(),
            )
            for n in self.names
        ]


def _discretize_numeric(name: str, raw: Sequence[str], spec: BinSpec):
    x = [float(v) for v in raw]
    if spec.mode == "equal_frequency":
        cuts = equal_frequency_cutpoints(x, spec.k)
    else:
        cuts = tuple(spec.cutpoints)
    idx = [bin_index(v, cuts) for v in x]
    nbins = len(cuts) + 1
    ranges: list[list[float] | None] = [None] * nbins
    for v, b in zip(x, idx):
        r = ranges[b]
        if r is None:
            ranges[b] = [v, v]
        elif v < r[0]:
            r[0] = v
        elif v > r[1]:
            r[1] = v
    if spec.bin_labels is not None:
        labels = tuple(spec.bin_labels)
    else:
        edges = (-np.inf, *cuts, np.inf)
        labels = tuple(
            interval_label(*r) if r is not None else interval_label(edges[b], edges[b + 1])
            for b, r in enumerate(ranges)
        )
        if len(set(labels)) != len(labels):
            raise PDDError(f"attribute {name!r}: generated bin labels collide: {labels}")
    column = tuple(labels[b] for b in idx)
    prov = {
        "mode": spec.mode,
        "cutpoints": list(cuts),
        "labels": list(labels),
        "ranges": ranges,
        "counts": [idx.count(b) for b in range(nbins)],
    }
    if spec.mode == "equal_frequency":
        prov["k"] = spec.k
    return labels, column, prov


def discretize_table(
    table: "DatasetTable", specs: Mapping[str, BinSpec] | None = None
) -> DiscretizedTable:
    """Map every attribute of ``table`` onto a finite label set.

    ``specs`` overrides the BinSpecs declared in the schema. Categorical and
    boolean attributes pass through; an ordinal attribute without a BinSpec
    keeps its declared levels; a numerical attribute without one is an error.
    """
    specs = dict(specs or {})
    labels: dict[str, tuple[str, ...]] = {}
    columns: dict[str, tuple[str, ...]] = {}
    provenance: dict[str, dict[str, Any]] = {}
    for attr in table.schema:
        name = attr.name
        raw = table.columns[name]
        spec = specs.get(name, attr.discretization)
        if attr.kind in ("categorical", "boolean"):
            spec = None
        if spec is None:
            if attr.kind == "numerical":
                raise MissingBinSpec(f"numerical attribute {name!r} has no discretization")
            labels[name] = (
                tuple(attr.allowed_values)
                if attr.allowed_values is not None
                else tuple(sorted(set(raw)))
            )
            columns[name] = tuple(raw)
            continue
        try:
            if spec.mode == "level_map":
                if attr.allowed_values is not None:
                    spec.check_covers(attr.allowed_values, attribute=name)
                columns[name] = tuple(apply_level_map(raw, spec.level_map))
                labels[name] = spec.target_labels
                provenance[name] = {
                    "mode": "level_map",
                    "level_map": dict(spec.level_map),
                    "labels": list(labels[name]),
                    "counts": [Counter(columns[name])[lab] for lab in labels[name]],
                }
            else:
                labels[name], columns[name], provenance[name] = _discretize_numeric(
                    name, raw, spec
                )
        except (TooFewDistinct, UnmappedLevel) as exc:
            raise type(exc)(f"attribute {name!r}: {exc}") from None
        except ValueError as exc:
            if isinstance(exc, PDDError):
                raise
            raise InvalidValue(f"attribute {name!r}: {exc}", column=name) from None
    return DiscretizedTable(
        names=tuple(a.name for a in table.schema),
        labels=labels,
        columns=columns,
        roles={a.name: a.role for a in table.schema},
        provenance=provenance,
        dropped=table.dropped,
    )
