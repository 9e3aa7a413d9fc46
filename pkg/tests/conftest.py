import re

import pytest

CRITERIA_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[CRITERIA_KEY] = []


@pytest.fixture
def criterion(request):
    """Record and print one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[CRITERIA_KEY]

    def log(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(CRITERIA_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(re.search(r"\d+", s).group())):
        terminalreporter.write_line(line)
