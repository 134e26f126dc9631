"""Suite-wide pytest hooks.

Tests marked ``criterion(n)`` are the numbered acceptance checks; after a run
that includes any of them a short summary section reports one PASS/FAIL line
per criterion number.
"""

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(n): numbered acceptance check, summarized at exit"
    )
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    bucket = item.config._criterion_results.setdefault(number, [])
    if report.failed:
        bucket.append("failed")
    elif report.when == "call" and report.passed:
        bucket.append("passed")
    elif report.skipped:
        bucket.append("skipped")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        outcomes = results[number]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif "passed" in outcomes:
            verdict = "PASS"
        else:
            verdict = "SKIP"
        terminalreporter.write_line(f"criterion {number}: {verdict}")
