import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vocoptim.corpus import Corpus  # noqa: E402

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, name = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _criteria.get(number, (name, "PASS"))[1]
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if prev == "FAIL" or (prev == "SKIP" and status == "PASS"):
            status = prev
        _criteria[number] = (name, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        name, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} [{status}] {name}")


@pytest.fixture
def mini():
    return Corpus(("ab ab", "ab"))


@pytest.fixture
def mini_file(tmp_path):
    p = tmp_path / "mini.txt"
    p.write_text("ab ab\nab\n", encoding="utf-8")
    return p
