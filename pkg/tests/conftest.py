"""Acceptance summary: one PASS/FAIL line per criterion.

Tests tagged ``@pytest.mark.acceptance(n, "title", limit=seconds)`` are
grouped by ``n``.  A criterion passes when every tagged test passed and the
summed setup, call and teardown time stays below ``limit``.  Tests may add
``record_property("detail", ...)`` lines that are echoed in the summary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import pytest


@dataclass
class _Criterion:
    title: str = ""
    limit: float | None = None
    tests: int = 0
    ran: int = 0
    failed: list[str] = field(default_factory=list)
    seconds: float = 0.0
    details: list[str] = field(default_factory=list)


_CRITERIA: dict[int, _Criterion] = {}
_OWNER: dict[str, int] = {}


def pytest_collection_finish(session):
    # runs after deselection, so only criteria that will actually run are listed
    for item in session.items:
        mark = item.get_closest_marker("acceptance")
        if mark is None:
            continue
        number, title = mark.args
        crit = _CRITERIA.setdefault(number, _Criterion(title))
        crit.limit = mark.kwargs.get("limit", crit.limit)
        crit.tests += 1
        _OWNER[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _OWNER.get(report.nodeid)
    if number is None:
        return
    crit = _CRITERIA[number]
    crit.seconds += report.duration
    if report.failed or (report.when == "call" and report.skipped):
        crit.failed.append(f"{report.nodeid.split('::')[-1]} ({report.when})")
    if report.when == "call":
        crit.ran += 1
        crit.details += [str(v) for k, v in report.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        crit = _CRITERIA[number]
        slow = crit.limit is not None and crit.seconds >= crit.limit
        missing = crit.tests - crit.ran
        ok = not crit.failed and not slow and not missing
        limit = f" (limit {crit.limit:.0f}s)" if crit.limit else ""
        tr.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {crit.title}  [{crit.seconds:.1f}s{limit}]")
        for line in crit.details:
            tr.write_line(f"    {line}")
        for name in crit.failed:
            tr.write_line(f"    failed: {name}")
        if missing:
            tr.write_line(f"    failed: {missing} of {crit.tests} tests did not run")
        if slow:
            tr.write_line("    failed: time limit exceeded")
