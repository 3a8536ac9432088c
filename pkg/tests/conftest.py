from __future__ import annotations

from collections import defaultdict

import pytest

_criteria: dict[int, list[tuple[str, str]]] = defaultdict(list)
_TITLES = {
    1: "graph-metric oracle equivalence",
    2: "Cinderella sentence fixture",
    3: "saturation fit recovery",
    4: "Spearman oracle and p-value",
    5: "synthetic grade-table reproduction",
    6: "determinism and scale",
    7: "boundary monotonicity",
}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[marker.args[0]].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        results = _criteria[number]
        failed = [name for name, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number} [{status}] {_TITLES.get(number, '')} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)
