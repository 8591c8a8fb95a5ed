"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from pdd.baseline import apriori, apriori_inverse, compare_criteria
from pdd.association import FORMULAS
from pdd.config import SUBGROUP_MODES, AnalysisConfig, parse_tau
from pdd.discretize import DiscretizedTable, discretize_table
from pdd.errors import InvariantViolation, PDDError
from pdd.patterns import FREQUENT, RARE
from pdd.pipeline import analyze, stage
from pdd.report import REPORT_FORMATS, read_kb, render, write_kb
from pdd.schema import dump_schema, load_schema, load_table
from pdd.synth import generate, load_generator_spec, write_csv, write_generated

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    """Bad option values caught after argument parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load(input_path: str, schema_path: str) -> DiscretizedTable:
    with stage("ingest"):
        schema = load_schema(schema_path)
        table = load_table(input_path, schema)
    with stage("discretize"):
        return discretize_table(table)


def _config(args) -> AnalysisConfig:
    try:
        return AnalysisConfig(
            tau=parse_tau(args.tau),
            max_ds=args.max_ds,
            formula=args.formula,
            subgroups=args.subgroups,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_discretize(args) -> int:
    table = _load(args.input, args.schema)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "table.csv", table)
    dump_schema(table.schema(), out / "schema.yaml")
    (out / "provenance.json").write_text(
        json.dumps(
            {"dropped": table.dropped, "M": table.M, "attributes": table.provenance},
            indent=1, sort_keys=True,
        ) + "\n",
        encoding="utf-8",
    )
    print(f"discretized {table.M} records ({table.dropped} dropped) -> {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    config = _config(args)
    table = _load(args.input, args.schema)
    kb = analyze(table, args.target, config)
    write_kb(kb, args.out)
    n_freq = len(kb.target_records(FREQUENT))
    n_rare = len(kb.target_records(RARE))
    print(f"T={kb.av_index.T} M={kb.M} dropped={kb.dropped}")
    print(f"retained spaces: {len(kb.spaces)} ({', '.join(s.name for s in kb.spaces) or 'none'})")
    print(f"target {kb.target}: frequent={n_freq} rare={n_rare}")
    print(f"knowledge base written to {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    kb = read_kb(args.kb)
    text = render(kb, args.format)
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = {"csv": "csv", "json": "json", "text": "txt"}[args.format]
    path = out / f"patterns.{ext}"
    path.write_text(text, encoding="utf-8")
    print(f"report written to {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _config(args)
    if not 0 < args.minsup <= 1 or not 0 < args.maxsup < 1:
        raise UsageError("--minsup must lie in (0, 1] and --maxsup in (0, 1)")
    table = _load(args.input, args.schema)
    kb = analyze(table, args.target, config)
    with stage("baseline"):
        mined = apriori(table, args.minsup, 0.0)
        rare = apriori_inverse(table, args.maxsup)
        report = compare_criteria(kb, mined, kb.target, args.top)
    doc = report.to_dict()
    doc["apriori_itemsets"] = len(mined.itemsets)
    doc["apriori_inverse_itemsets"] = len(rare)
    doc["minsup"], doc["maxsup"] = args.minsup, args.maxsup
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"comparison written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = load_generator_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    table, truth = generate(spec)
    paths = write_generated(args.out, table, truth, spec)
    print(f"generated {table.M} records x {len(table.names)} attributes -> {paths['data']}")
    return EXIT_OK


def _analysis_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="input CSV")
    p.add_argument("--schema", required=True, help="schema YAML")
    p.add_argument("--target", default=None, help="target attribute (default: schema role)")
    p.add_argument("--tau", default="1.96", help="threshold, number or preset 95%%/85%%/80%%")
    p.add_argument("--max-ds", type=int, default=5, help="maximum retained spaces")
    p.add_argument("--formula", choices=FORMULAS, default="standard")
    p.add_argument("--subgroups", choices=SUBGROUP_MODES, default="components")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdd", description="Pattern discovery on categorical survey tables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("discretize", help="apply the schema's binning and write a categorical table")
    p.add_argument("--input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("analyze", help="build a knowledge base")
    _analysis_options(p)
    p.add_argument("--out", required=True, help="knowledge base file")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("report", help="render pattern tables from a knowledge base")
    p.add_argument("--kb", required=True)
    p.add_argument("--format", choices=REPORT_FORMATS, default="text")
    p.add_argument("--out", default=None, help="output directory (default: stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("compare", help="rank target-linked pairs by support, confidence, AR and RAR")
    _analysis_options(p)
    p.add_argument("--minsup", type=float, default=0.01)
    p.add_argument("--maxsup", type=float, default=0.05)
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out", default=None, help="output JSON file (default: stdout)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic table with planted associations")
    p.add_argument("--spec", required=True, help="generator spec YAML")
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pdd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PDDError as exc:
        print(f"pdd: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantViolation as exc:
        print(f"pdd: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"pdd: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
