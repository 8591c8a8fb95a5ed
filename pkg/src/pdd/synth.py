"""Synthetic survey-like tables with planted attribute-value associations.

Generative model: each record draws a target class from the class
proportions. For every feature attribute, a record whose class owns a
planted block covering that attribute takes the block's partner value with
probability ``p_in``; otherwise the value is drawn uniformly.

Randomness comes from a counter-based SplitMix64 stream so any
implementation can reproduce a table from its seed. The n-th 64-bit output
(n = 0, 1, ...) for seed ``s`` is::

    z = (s + (n + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z = z ^ (z >> 31)

and the matching uniform double is ``(z >> 11) * 2**-53``. Record ``r``
(0-based) consumes outputs ``n = r * S + slot`` with ``S = 1 + 2 * F`` for
``F`` feature attributes: slot 0 picks the class, slot ``1 + 2f`` is the
adherence coin and slot ``2 + 2f`` the value draw for feature ``f``. A class
is chosen as the first index whose cumulative proportion exceeds the
uniform; a uniform value over ``n`` options is ``floor(u * n)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from pdd.discretize import DiscretizedTable
from pdd.errors import InconsistentInputs, InvalidSpec
from pdd.patterns import FREQUENT

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """SplitMix64 outputs at the given stream positions (vectorized)."""
    n = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK64) + (n + np.uint64(1)) * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
        return z ^ (z >> np.uint64(31))


def uniforms(seed: int, counters: np.ndarray) -> np.ndarray:
    return (splitmix64(seed, counters) >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass(frozen=True)
class Block:
    target_value: str
    partners: tuple[tuple[str, str], ...]
    p_in: float = 0.9


@dataclass(frozen=True)
class GeneratorSpec:
    """Generator parameters.

    ``attributes`` lists the feature attributes as ``(name, labels)``.
    ``plant=False`` ignores every block (null model). ``noise=False`` stops
    records outside a block's class from drawing that block's partner values.
    """

    M: int
    attributes: tuple[tuple[str, tuple[str, ...]], ...]
    target: str = "Target"
    target_values: tuple[str, ...] = ("majority", "minority")
    proportions: tuple[float, ...] = (0.883, 0.117)
    blocks: tuple[Block, ...] = ()
    seed: int = 0
    noise: bool = True
    plant: bool = True

    def __post_init__(self):
        if self.M < 0:
            raise InvalidSpec("M must be non-negative")
        if len(self.target_values) != len(self.proportions) or len(self.target_values) < 2:
            raise InvalidSpec("need one proportion per target value and at least two values")
        if any(p < 0 for p in self.proportions) or not math.isclose(
            sum(self.proportions), 1.0, abs_tol=1e-9
        ):
            raise InvalidSpec(f"class proportions must be non-negative and sum to 1")
        names = [self.target] + [a for a, _ in self.attributes]
        if len(set(names)) != len(names):
            raise InvalidSpec("attribute names must be unique")
        labels = dict(self.attributes)
        for name, labs in self.attributes:
            if len(labs) < 2 or len(set(labs)) != len(labs):
                raise InvalidSpec(f"attribute {name!r} needs at least two distinct values")
        owned: set[tuple[str, str]] = set()
        for b in self.blocks:
            if b.target_value not in self.target_values:
                raise InvalidSpec(f"block target value {b.target_value!r} is not declared")
            if not 0.5 < b.p_in <= 1:
                raise InvalidSpec(f"p_in must lie in (0.5, 1], got {b.p_in}")
            for attr, val in b.partners:
                if attr not in labels or val not in labels[attr]:
                    raise InvalidSpec(f"block partner {attr}={val} is not declared")
                if (b.target_value, attr) in owned:
                    raise InvalidSpec(
                        f"attribute {attr!r} planted twice for class {b.target_value!r}"
                    )
                owned.add((b.target_value, attr))

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "GeneratorSpec":
        try:
            attrs = []
            for entry in doc["attributes"]:
                vals = entry["values"]
                labs = tuple(f"v{i}" for i in range(1, int(vals) + 1)) if isinstance(
                    vals, int
                ) else tuple(str(v) for v in vals)
                attrs.append((str(entry["name"]), labs))
            target = doc.get("target", {})
            blocks = tuple(
                Block(
                    target_value=str(b["target_value"]),
                    partners=tuple((str(a), str(v)) for a, v in b["partners"]),
                    p_in=float(b.get("p_in", 0.9)),
                )
                for b in doc.get("blocks", [])
            )
            return cls(
                M=int(doc["M"]),
                attributes=tuple(attrs),
                target=str(target.get("name", "Target")),
                target_values=tuple(str(v) for v in target.get("values", ("majority", "minority"))),
                proportions=tuple(float(p) for p in target.get("proportions", (0.883, 0.117))),
                blocks=blocks,
                seed=int(doc.get("seed", 0)),
                noise=bool(doc.get("noise", True)),
                plant=bool(doc.get("plant", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"bad generator spec: {exc!r}") from None

    def to_dict(self) -> dict[str, Any]:
        return {
            "M": self.M,
            "seed": self.seed,
            "noise": self.noise,
            "plant": self.plant,
            "target": {
                "name": self.target,
                "values": list(self.target_values),
                "proportions": list(self.proportions),
            },
            "attributes": [{"name": n, "values": list(v)} for n, v in self.attributes],
            "blocks": [
                {"target_value": b.target_value, "partners": [list(p) for p in b.partners],
                 "p_in": b.p_in}
                for b in self.blocks
            ],
        }


def load_generator_spec(path: str | Path) -> GeneratorSpec:
    with open(path, encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, Mapping):
        raise InvalidSpec(f"{path}: generator spec must be a mapping")
    return GeneratorSpec.from_dict(doc)


@dataclass(frozen=True)
class PlantedTruth:
    target: str
    blocks: tuple[tuple[tuple[tuple[str, str], tuple[str, str]], ...], ...]
    fingerprint: str | None = None

    @classmethod
    def from_spec(cls, spec: GeneratorSpec, fingerprint: str | None = None) -> "PlantedTruth":
        return cls(
            target=spec.target,
            blocks=tuple(
                tuple(((spec.target, b.target_value), p) for p in b.partners) for b in spec.blocks
            ),
            fingerprint=fingerprint,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target,
            "fingerprint": self.fingerprint,
            "blocks": [[[list(t), list(p)] for t, p in blk] for blk in self.blocks],
        }


def generate(spec: GeneratorSpec) -> tuple[DiscretizedTable, PlantedTruth]:
    m, nf = spec.M, len(spec.attributes)
    stride = 1 + 2 * nf
    base = np.arange(m, dtype=np.uint64) * np.uint64(stride)

    cum = np.cumsum(spec.proportions)
    cls = np.searchsorted(cum, uniforms(spec.seed, base), side="right")
    cls = np.minimum(cls, len(spec.target_values) - 1)
    class_of = {v: c for c, v in enumerate(spec.target_values)}

    columns = {spec.target: tuple(spec.target_values[c] for c in cls)}
    labels = {spec.target: tuple(spec.target_values)}
    for f, (name, labs) in enumerate(spec.attributes):
        coin = uniforms(spec.seed, base + np.uint64(1 + 2 * f))
        draw = uniforms(spec.seed, base + np.uint64(2 + 2 * f))
        nvals = len(labs)
        planted = np.full(len(spec.target_values), -1, dtype=np.int64)
        p_in = np.zeros(len(spec.target_values))
        if spec.plant:
            for b in spec.blocks:
                for attr, val in b.partners:
                    if attr == name:
                        planted[class_of[b.target_value]] = labs.index(val)
                        p_in[class_of[b.target_value]] = b.p_in
        value = np.empty(m, dtype=np.int64)
        for c in range(len(spec.target_values)):
            rows = cls == c
            if spec.noise or not spec.plant:
                allowed = np.arange(nvals)
            else:
                foreign = {int(planted[o]) for o in range(len(planted)) if o != c and planted[o] >= 0}
                foreign.discard(int(planted[c]))
                allowed = np.array([v for v in range(nvals) if v not in foreign])
                if allowed.size == 0:
                    raise InvalidSpec(f"attribute {name!r} has no value left for class {c}")
            value[rows] = allowed[np.floor(draw[rows] * allowed.size).astype(np.int64)]
            if planted[c] >= 0:
                hit = rows & (coin < p_in[c])
                value[hit] = planted[c]
        columns[name] = tuple(labs[v] for v in value)
        labels[name] = tuple(labs)

    names = (spec.target,) + tuple(n for n, _ in spec.attributes)
    table = DiscretizedTable(
        names=names,
        labels=labels,
        columns=columns,
        roles={n: ("target" if n == spec.target else "feature") for n in names},
    )
    return table, PlantedTruth.from_spec(spec, table.fingerprint())


def write_generated(
    out_dir: str | Path, table: DiscretizedTable, truth: PlantedTruth, spec: GeneratorSpec
) -> dict[str, Path]:
    """Write ``data.csv``, ``schema.yaml``, ``truth.json`` and the effective spec."""
    from pdd.schema import dump_schema

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "data": out / "data.csv",
        "schema": out / "schema.yaml",
        "truth": out / "truth.json",
        "spec": out / "spec.yaml",
    }
    write_csv(paths["data"], table)
    dump_schema(table.schema(), paths["schema"])
    paths["truth"].write_text(json.dumps(truth.to_dict(), indent=1) + "\n", encoding="utf-8")
    with open(paths["spec"], "w", encoding="utf-8") as fh:
        yaml.safe_dump(spec.to_dict(), fh, sort_keys=False)
    return paths


def write_csv(path: str | Path, table: DiscretizedTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.names)
        w.writerows(zip(*(table.columns[n] for n in table.names)))


@dataclass
class BlockRecovery:
    target_value: str
    planted: int
    recovered: int
    recall: float
    precision: float | None
    missed: list[tuple[str, str]] = field(default_factory=list)


def evaluate_recovery(kb, truth: PlantedTruth) -> dict[str, Any]:
    """Recall and precision of the frequent target-linked patterns against planted truth.

    Recall is the share of a block's planted pairs classified frequent for
    its target value; precision is the share of that target value's frequent
    partners that were planted. ``recall`` is ``None`` without blocks.
    """
    if truth.fingerprint is not None and truth.fingerprint != kb.fingerprint:
        raise InconsistentInputs("knowledge base was not built from the generated table")
    if kb.target != truth.target:
        raise InconsistentInputs(f"knowledge base target {kb.target!r} != {truth.target!r}")
    frequent: dict[str, set[tuple[str, str]]] = {}
    for tp in kb.targets:
        frequent[tp.value] = {r.av2 for r in tp.records(FREQUENT)}
    blocks = []
    total = hit = 0
    for blk in truth.blocks:
        tv = blk[0][0][1] if blk else None
        partners = [p for _, p in blk]
        found = frequent.get(tv, set())
        got = [p for p in partners if p in found]
        planted_for_tv = {p for b in truth.blocks for (t, p) in b if t[1] == tv}
        blocks.append(
            BlockRecovery(
                target_value=tv,
                planted=len(partners),
                recovered=len(got),
                recall=len(got) / len(partners) if partners else float("nan"),
                precision=len(found & planted_for_tv) / len(found) if found else None,
                missed=[p for p in partners if p not in found],
            )
        )
        total += len(partners)
        hit += len(got)
    return {"blocks": blocks, "recall": hit / total if total else None}
