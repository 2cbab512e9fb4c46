"""Acceptance bookkeeping: one PASS/FAIL line per criterion in the terminal summary."""

import pytest

_OUTCOMES: dict[int, tuple[list[str], str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _OUTCOMES.setdefault(number, ([], title))[0].append(status)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        statuses, title = _OUTCOMES[number]
        # a criterion covered by several tests passes only if all of them pass
        status = next((s for s in ("FAIL", "SKIP") if s in statuses), "PASS")
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")
