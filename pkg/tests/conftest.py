from __future__ import annotations

import time

import pytest

TIME_LIMIT = 10.0  # seconds per acceptance criterion

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call", "teardown"):
        return
    number, title = marker.args
    entry = _outcomes.setdefault(number, {"title": title, "passed": True, "seconds": 0.0})
    entry["seconds"] += report.duration
    if report.failed:
        entry["passed"] = False


@pytest.fixture
def within_time_limit():
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < TIME_LIMIT, f"took {elapsed:.1f}s, limit {TIME_LIMIT:.0f}s"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        tag = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {tag}  {entry['title']} ({entry['seconds']:.2f}s)")
