from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from pdd.discretize import DiscretizedTable

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "pdd" / "data"

_acceptance: dict[str, tuple[int, str]] = {}
_outcomes: dict[int, list[str]] = {}


def make_table(rows, names, labels=None, target=None) -> DiscretizedTable:
    """Categorical table from a list of row tuples."""
    cols = {n: tuple(str(r[k]) for r in rows) for k, n in enumerate(names)}
    if labels is None:
        labels = {n: tuple(sorted(set(cols[n]))) for n in names}
    return DiscretizedTable(
        names=tuple(names),
        labels={n: tuple(labels[n]) for n in names},
        columns=cols,
        roles={n: ("target" if n == target else "feature") for n in names},
    )


def random_table(rng: np.random.Generator, m: int, n_attr: int, max_vals: int) -> DiscretizedTable:
    names = [f"A{k}" for k in range(n_attr)]
    labels, cols = {}, {}
    for n in names:
        nv = int(rng.integers(2, max_vals + 1))
        labels[n] = tuple(f"x{v}" for v in range(nv))
        cols[n] = tuple(labels[n][v] for v in rng.integers(0, nv, size=m))
    return DiscretizedTable(names=tuple(names), labels=labels, columns=cols)


@pytest.fixture
def four_records() -> DiscretizedTable:
    return make_table(
        [("a1", "b1"), ("a1", "b1"), ("a1", "b2"), ("a2", "b2")],
        ["A", "B"],
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _acceptance[item.nodeid] = (int(mark.args[0]), str(mark.args[1]))


def pytest_runtest_logreport(report):
    info = _acceptance.get(report.nodeid)
    if info is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(info[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    titles = {}
    for num, title in _acceptance.values():
        titles.setdefault(num, title)
    terminalreporter.section("acceptance criteria")
    for num in sorted(titles):
        outcomes = _outcomes.get(num, [])
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"AC{num} {status}: {titles[num]}")
