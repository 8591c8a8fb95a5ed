"""Knowledge-base file format and pattern-table rendering.

The KB file is a JSON document with one top-level key per line. Floats are
written with full round-trip precision; ``format_version`` guards readers.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from pdd.association import ArvMatrix, AvIndex, ContingencyModel
from pdd.config import FORMAT_VERSION, AnalysisConfig
from pdd.disentangle import DisentangledSpace
from pdd.errors import BadKnowledgeBase
from pdd.patterns import (
    FREQUENT,
    RARE,
    AvaRecord,
    KnowledgeBase,
    PatternGroup,
    PatternSection,
    SubPatternGroup,
    TargetPatterns,
)

REPORT_FORMATS = ("csv", "json", "text")
COLUMNS = ("Support", "Confidence", "SR", "Attribute", "Attribute Value")


def _record_to_dict(r: AvaRecord) -> dict[str, Any]:
    return {
        "av1": list(r.av1),
        "av2": list(r.av2),
        "cooccurrence": r.cooccurrence,
        "support": r.support,
        "confidence": r.confidence,
        "ar": r.ar,
        "best_rar": r.best_rar,
        "best_ds": r.best_ds,
        "classification": r.classification,
        "significant_in": list(r.significant_in),
        "degenerate": r.degenerate,
    }


def _record_from_dict(d: dict[str, Any]) -> AvaRecord:
    return AvaRecord(
        av1=tuple(d["av1"]),
        av2=tuple(d["av2"]),
        cooccurrence=int(d["cooccurrence"]),
        support=float(d["support"]),
        confidence=None if d["confidence"] is None else float(d["confidence"]),
        ar=float(d["ar"]),
        best_rar=None if d["best_rar"] is None else float(d["best_rar"]),
        best_ds=None if d["best_ds"] is None else int(d["best_ds"]),
        classification=str(d["classification"]),
        significant_in=tuple(int(x) for x in d["significant_in"]),
        degenerate=bool(d["degenerate"]),
    )


def _sections_to_list(sections) -> list[dict[str, Any]]:
    return [
        {
            "ds_id": s.ds_id,
            "pg": s.pg,
            "sub": s.sub,
            "location": s.location,
            "records": [_record_to_dict(r) for r in s.records],
        }
        for s in sections
    ]


def _sections_from_list(items) -> tuple[PatternSection, ...]:
    return tuple(
        PatternSection(
            int(s["ds_id"]), int(s["pg"]), int(s["sub"]),
            tuple(_record_from_dict(r) for r in s["records"]),
        )
        for s in items
    )


def kb_to_dict(kb: KnowledgeBase) -> dict[str, Any]:
    index = kb.av_index
    spaces = []
    for s in kb.spaces:
        sig = np.argwhere(np.triu(s.significant(kb.config.tau), 1))
        spaces.append(
            {
                "ds_id": s.ds_id,
                "eigenvalue": s.eigenvalue,
                "loading": s.loading.tolist(),
                "significant_rar": [[int(i), int(j), float(s.rarv[i, j])] for i, j in sig],
            }
        )
    return {
        "format_version": kb.format_version,
        "fingerprint": kb.fingerprint,
        "config": kb.config.to_dict(),
        "target": kb.target,
        "M": kb.M,
        "dropped": kb.dropped,
        "T": index.T,
        "attributes": [dict(a) for a in kb.attributes],
        "provenance": kb.provenance,
        "av_index": [list(e) for e in index.entries],
        "occ_single": kb.model.occ_single.tolist(),
        "occ_pair": kb.model.occ_pair.tolist(),
        "arv": kb.arv.values.tolist(),
        "eigenvalues": kb.eigenvalues.tolist(),
        "spaces": spaces,
        "pattern_groups": [
            {"ds_id": g.ds_id, "pg": g.pg, "name": g.name, "polarity": g.polarity,
             "members": list(g.members)}
            for g in kb.groups
        ],
        "subgroups": [
            {"ds_id": sg.ds_id, "pg": sg.pg, "sub": sg.sub, "name": sg.full_name,
             "members": list(sg.members), "cross_polarity": sg.cross_polarity}
            for sg in kb.subgroups
        ],
        "counts": dict(kb.counts),
        "targets": [
            {
                "attribute": tp.attribute,
                "value": tp.value,
                "count": tp.count,
                "degenerate": tp.degenerate,
                "frequent": _sections_to_list(tp.frequent),
                "rare": _sections_to_list(tp.rare),
            }
            for tp in kb.targets
        ],
        "coverage": [
            {"pattern": [list(av) for av in key], "records": list(ids)}
            for key, ids in kb.coverage.items()
        ],
    }


def kb_from_dict(doc: dict[str, Any]) -> KnowledgeBase:
    if not isinstance(doc, dict):
        raise BadKnowledgeBase("knowledge base must be a JSON object")
    if doc.get("format_version") != FORMAT_VERSION:
        raise BadKnowledgeBase(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        attributes = tuple(dict(a) for a in doc["attributes"])
        index = AvIndex(
            entries=tuple((str(a), str(v)) for a, v in doc["av_index"]),
            attributes=tuple(a["name"] for a in attributes),
        )
        m = int(doc["M"])
        occ = np.array(doc["occ_single"], dtype=np.int64).reshape(index.T)
        pair = np.array(doc["occ_pair"], dtype=np.int64).reshape(index.T, index.T)
        model = ContingencyModel(M=m, occ_single=occ, occ_pair=pair, av_index=index)
        cfg = AnalysisConfig(**doc["config"])
        bad = (occ <= 0) | (occ >= m)
        arv = ArvMatrix(
            values=np.array(doc["arv"], dtype=np.float64).reshape(index.T, index.T),
            av_index=index,
            degenerate=index.cross_mask() & (bad[:, None] | bad[None, :]),
            formula=cfg.formula,
        )
        spaces = []
        for s in doc["spaces"]:
            u = np.array(s["loading"], dtype=np.float64)
            lam = float(s["eigenvalue"])
            spaces.append(DisentangledSpace(int(s["ds_id"]), lam, u, lam * np.outer(u, u), index))
        return KnowledgeBase(
            fingerprint=str(doc["fingerprint"]),
            config=cfg,
            target=doc["target"],
            attributes=attributes,
            provenance=doc["provenance"],
            model=model,
            arv=arv,
            eigenvalues=np.array(doc["eigenvalues"], dtype=np.float64),
            spaces=tuple(spaces),
            groups=tuple(
                PatternGroup(int(g["ds_id"]), int(g["pg"]), str(g["polarity"]),
                             tuple(int(x) for x in g["members"]))
                for g in doc["pattern_groups"]
            ),
            subgroups=tuple(
                SubPatternGroup(int(g["ds_id"]), int(g["pg"]), int(g["sub"]),
                                tuple(int(x) for x in g["members"]), bool(g["cross_polarity"]))
                for g in doc["subgroups"]
            ),
            targets=tuple(
                TargetPatterns(
                    attribute=str(t["attribute"]),
                    value=str(t["value"]),
                    count=int(t["count"]),
                    degenerate=bool(t["degenerate"]),
                    frequent=_sections_from_list(t["frequent"]),
                    rare=_sections_from_list(t["rare"]),
                )
                for t in doc["targets"]
            ),
            coverage={
                tuple(tuple(av) for av in c["pattern"]): tuple(int(x) for x in c["records"])
                for c in doc["coverage"]
            },
            counts={str(k): int(v) for k, v in doc["counts"].items()},
            dropped=int(doc["dropped"]),
            format_version=str(doc["format_version"]),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, BadKnowledgeBase):
            raise
        raise BadKnowledgeBase(f"corrupt knowledge base: {exc!r}") from None


def dumps_kb(kb: KnowledgeBase) -> str:
    doc = kb_to_dict(kb)
    lines = [
        f"{json.dumps(k)}: {json.dumps(v, separators=(',', ':'), allow_nan=False)}"
        for k, v in doc.items()
    ]
    return "{\n" + ",\n".join(lines) + "\n}\n"


def write_kb(kb: KnowledgeBase, path: str | Path) -> None:
    Path(path).write_text(dumps_kb(kb), encoding="utf-8")


def read_kb(path: str | Path) -> KnowledgeBase:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadKnowledgeBase(f"{path}: cannot read knowledge base: {exc}") from None
    return kb_from_dict(doc)


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.2f}"


def _row(r: AvaRecord) -> tuple[str, ...]:
    return (_fmt(r.support), _fmt(r.confidence), _fmt(r.ar), r.av2[0], r.av2[1])


def _text_table(rows: list[tuple[str, ...]]) -> list[str]:
    widths = [max(len(h), *(len(r[k]) for r in rows)) for k, h in enumerate(COLUMNS)]
    fmt = "  ".join(f"{{:>{w}}}" if k < 3 else f"{{:<{w}}}" for k, w in enumerate(widths))
    return [fmt.format(*COLUMNS).rstrip()] + [fmt.format(*r).rstrip() for r in rows]


def render_text(kb: KnowledgeBase) -> str:
    out = []
    for kind, title in ((FREQUENT, "Frequent Patterns"), (RARE, "Rare Patterns")):
        out.append(f"{title}: characteristics associated with {kb.target}")
        out.append("=" * len(out[-1]))
        for tp in kb.targets:
            out.append("")
            out.append(f"{tp.attribute} = {tp.value}  (n={tp.count})")
            sections = tp.frequent if kind == FREQUENT else tp.rare
            if tp.degenerate:
                out.append("  none (degenerate target value)")
                continue
            if not sections:
                out.append("  none")
                continue
            for n, sec in enumerate(sections, start=1):
                out.append(f"Group {n} (Discovered in {sec.location})")
                out.extend("  " + line for line in _text_table([_row(r) for r in sec.records]))
        out.append("")
    return "\n".join(out)


def render_csv(kb: KnowledgeBase) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["target_attribute", "target_value", "kind", "group", "location", *COLUMNS])
    for kind in (FREQUENT, RARE):
        for tp in kb.targets:
            sections = tp.frequent if kind == FREQUENT else tp.rare
            for n, sec in enumerate(sections, start=1):
                for r in sec.records:
                    w.writerow([
                        tp.attribute, tp.value, kind, n, sec.location,
                        repr(r.support), "" if r.confidence is None else repr(r.confidence),
                        repr(r.ar), r.av2[0], r.av2[1],
                    ])
    return buf.getvalue()


def render_json(kb: KnowledgeBase) -> str:
    doc = kb_to_dict(kb)
    return json.dumps({"target": kb.target, "targets": doc["targets"]}, indent=1) + "\n"


def render(kb: KnowledgeBase, fmt: str) -> str:
    if fmt == "text":
        return render_text(kb)
    if fmt == "csv":
        return render_csv(kb)
    if fmt == "json":
        return render_json(kb)
    raise ValueError(f"unknown report format {fmt!r}")
