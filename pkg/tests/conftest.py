"""Shared pytest hooks: print one line per acceptance criterion."""

import re

import pytest

_results: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance" not in item.nodeid:
        return
    match = re.search(r"test_criterion_(\d+)", item.name)
    if not match:
        return
    number = int(match.group(1))
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    if report.when == "call":
        _results[number] = ("PASS" if report.passed else "FAIL", doc)
    elif report.when == "setup" and (report.failed or report.skipped):
        _results[number] = ("FAIL", doc)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        status, doc = _results[number]
        terminalreporter.write_line(f"criterion {number}: {status} - {doc}")
