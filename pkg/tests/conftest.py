"""Shared fixtures: the acceptance check reporter.

Acceptance tests record a one-line verdict through the `acceptance`
fixture; the lines are replayed in a terminal section at the end of the
run so they stay visible even when capture hides per-test stdout.
"""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    def record(ok: bool, detail: str):
        label = request.node.name.removeprefix("test_")
        line = f"{label}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
