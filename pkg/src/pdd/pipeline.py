"""End-to-end analysis: categorical table in, knowledge base out."""

from __future__ import annotations

from contextlib import contextmanager

from pdd.association import build_arv, build_contingency
from pdd.config import AnalysisConfig
from pdd.discretize import DiscretizedTable
from pdd.disentangle import eigendecompose, select_spaces
from pdd.errors import EmptyDataset, InvariantViolation, PDDError, UnknownTarget
from pdd.patterns import (
    KnowledgeBase,
    assemble_kb,
    extract_target_patterns,
    form_pattern_groups,
    form_subgroups,
)


@contextmanager
def stage(name: str):
    """Prefix any data or invariant error raised inside with ``[name]``."""
    try:
        yield
    except (PDDError, InvariantViolation) as exc:
        msg = str(exc)
        if not msg.startswith("["):
            exc.args = (f"[{name}] {msg}",) + exc.args[1:]
        raise


def analyze(
    table: DiscretizedTable, target: str | None = None, config: AnalysisConfig | None = None
) -> KnowledgeBase:
    """Run counting, AR matrix, disentanglement and pattern extraction.

    ``target`` defaults to the attribute flagged as target in ``table``. The
    target only matters from pattern extraction onward.
    """
    config = config or AnalysisConfig()
    with stage("validate"):
        target = target or table.target
        if target is None or target not in table.names:
            raise UnknownTarget(f"unknown or missing target attribute {target!r}")
        if table.M == 0:
            raise EmptyDataset("the table has no complete records")
        table = table.with_target(target)
    with stage("contingency"):
        index, model = build_contingency(table)
    with stage("arv"):
        arv = build_arv(index, model, config.formula)
    with stage("disentangle"):
        decomp = eigendecompose(arv)
        spaces = select_spaces(decomp, config.tau, config.max_ds)
    with stage("patterns"):
        by_id = {s.ds_id: s for s in spaces}
        groups = form_pattern_groups(spaces, config.tau)
        subgroups = [
            sg
            for g in groups
            for sg in form_subgroups(g, by_id[g.ds_id], config.tau, config.subgroups)
        ]
        targets = extract_target_patterns(
            model, spaces, subgroups, target, config.tau, config.formula
        )
    with stage("assemble"):
        return assemble_kb(table, model, arv, decomp, spaces, groups, subgroups, targets, config)
