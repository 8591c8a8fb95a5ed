"""Attribute schema declaration and complete-case table loading."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

import yaml

from pdd.discretize import BinSpec
from pdd.errors import (
    DuplicateAttribute,
    EmptyFile,
    HeaderMismatch,
    InvalidValue,
    SchemaParseError,
    UnknownKind,
)

KINDS = ("categorical", "boolean", "ordinal", "numerical")
ROLES = ("feature", "target")
DEFAULT_MISSING_TOKENS = frozenset({"", "NA", "N/A", "-9", "."})


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str = "categorical"
    role: str = "feature"
    allowed_values: tuple[str, ...] | None = None
    discretization: BinSpec | None = None
    missing_tokens: frozenset[str] = DEFAULT_MISSING_TOKENS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownKind(f"attribute {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SchemaParseError(f"attribute {self.name!r}: unknown role {self.role!r}")
        if self.kind == "ordinal" and not self.allowed_values:
            raise SchemaParseError(
                f"ordinal attribute {self.name!r} must declare its ordered values"
            )
        if self.allowed_values is not None and len(set(self.allowed_values)) != len(
            self.allowed_values
        ):
            raise SchemaParseError(f"attribute {self.name!r}: repeated allowed value")

    @property
    def is_discrete(self) -> bool:
        """True when the raw values are already usable as category labels."""
        return self.kind in ("categorical", "boolean") or (
            self.kind == "ordinal" and self.discretization is None
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"name": self.name, "kind": self.kind, "role": self.role}
        if self.allowed_values is not None:
            out["values"] = list(self.allowed_values)
        if self.discretization is not None:
            out["discretization"] = self.discretization.to_dict()
        if self.missing_tokens != DEFAULT_MISSING_TOKENS:
            out["missing_tokens"] = sorted(self.missing_tokens)
        return out


def _str_list(values, where: str) -> tuple[str, ...]:
    if not isinstance(values, (list, tuple)):
        raise SchemaParseError(f"{where}: expected a list, got {type(values).__name__}")
    return tuple(str(v) for v in values)


def parse_schema(doc: Mapping[str, Any] | None) -> list[AttributeSchema]:
    """Build a validated attribute list from an already-parsed schema document."""
    if doc is None:
        return []
    if not isinstance(doc, Mapping):
        raise SchemaParseError("schema document must be a mapping")
    global_missing = doc.get("missing_tokens")
    default_missing = (
        frozenset(_str_list(global_missing, "missing_tokens"))
        if global_missing is not None
        else DEFAULT_MISSING_TOKENS
    )
    entries = doc.get("attributes") or []
    if not isinstance(entries, list):
        raise SchemaParseError("'attributes' must be a list")

    attrs: list[AttributeSchema] = []
    seen: set[str] = set()
    for pos, entry in enumerate(entries):
        if not isinstance(entry, Mapping) or "name" not in entry:
            raise SchemaParseError(f"attribute #{pos}: expected a mapping with a 'name'")
        name = str(entry["name"])
        if name in seen:
            raise DuplicateAttribute(f"duplicate attribute name {name!r}")
        seen.add(name)
        values = entry.get("values")
        missing = entry.get("missing_tokens")
        disc = entry.get("discretization")
        attrs.append(
            AttributeSchema(
                name=name,
                kind=str(entry.get("kind", "categorical")),
                role=str(entry.get("role", "feature")),
                allowed_values=None if values is None else _str_list(values, name),
                discretization=None
                if disc is None
                else BinSpec.from_dict(disc, attribute=name),
                missing_tokens=default_missing
                if missing is None
                else frozenset(_str_list(missing, name)),
            )
        )
    for attr in attrs:
        spec = attr.discretization
        if spec is not None and spec.mode == "level_map" and attr.allowed_values:
            spec.check_covers(attr.allowed_values, attribute=attr.name)
    return attrs


def load_schema(path: str | Path) -> list[AttributeSchema]:
    """Read a YAML schema document and return its validated attributes."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise SchemaParseError(f"{path}: {exc}") from exc
    return parse_schema(doc)


def dump_schema(attrs: Sequence[AttributeSchema], path: str | Path) -> None:
    doc = {"attributes": [a.to_dict() for a in attrs]}
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False, allow_unicode=True)


@dataclass(frozen=True)
class DatasetTable:
    """Complete-case records stored column-wise, in schema order.

    Record ids are the 0-based positions of the kept rows in file order.
    """

    schema: tuple[AttributeSchema, ...]
    columns: Mapping[str, tuple[str, ...]]
    dropped: int = 0
    raw_rows: int = field(default=-1)

    def __post_init__(self):
        if self.raw_rows < 0:
            object.__setattr__(self, "raw_rows", self.M + self.dropped)

    @property
    def M(self) -> int:
        if not self.schema:
            return 0
        return len(self.columns[self.schema[0].name])

    @property
    def record_ids(self) -> range:
        return range(self.M)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)

    def attribute(self, name: str) -> AttributeSchema:
        for a in self.schema:
            if a.name == name:
                return a
        raise KeyError(name)

    def records(self) -> Iterator[dict[str, str]]:
        names = self.names
        for row in zip(*(self.columns[n] for n in names)):
            yield dict(zip(names, row))


def _validate_cell(attr: AttributeSchema, value: str, line: int) -> None:
    if attr.kind == "numerical":
        try:
            ok = math.isfinite(float(value))
        except ValueError:
            ok = False
        if not ok:
            raise InvalidValue(
                f"row {line}, column {attr.name!r}: {value!r} is not a finite number",
                row=line,
                column=attr.name,
            )
    elif attr.allowed_values is not None and value not in attr.allowed_values:
        raise InvalidValue(
            f"row {line}, column {attr.name!r}: {value!r} not in allowed values",
            row=line,
            column=attr.name,
        )


def load_table(path: str | Path, schema: Sequence[AttributeSchema]) -> DatasetTable:
    """Load a CSV file, keeping only complete cases.

    ``row`` numbers in error messages count data rows from 1 (header excluded).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: file is empty")
        header = [h.strip() for h in header]
        names = [a.name for a in schema]
        if sorted(header) != sorted(names) or len(set(header)) != len(header):
            missing = sorted(set(names) - set(header))
            extra = sorted(set(header) - set(names))
            raise HeaderMismatch(
                f"{path}: header does not match schema (missing={missing}, extra={extra})"
            )
        pos = [header.index(n) for n in names]
        cols: list[list[str]] = [[] for _ in names]
        dropped = 0
        line = 0
        for raw in reader:
            if not raw:
                continue
            line += 1
            if len(raw) != len(header):
                raise InvalidValue(
                    f"row {line}: expected {len(header)} fields, got {len(raw)}", row=line
                )
            cells = [raw[p].strip() for p in pos]
            if any(c in a.missing_tokens for c, a in zip(cells, schema)):
                dropped += 1
                continue
            for c, a in zip(cells, schema):
                _validate_cell(a, c, line)
            for col, c in zip(cols, cells):
                col.append(c)
    for a, col in zip(schema, cols):
        if a.kind == "boolean" and a.allowed_values is None and len(set(col)) > 2:
            raise InvalidValue(f"boolean column {a.name!r} has more than two values", column=a.name)
    return DatasetTable(
        schema=tuple(schema),
        columns={n: tuple(c) for n, c in zip(names, cols)},
        dropped=dropped,
    )
