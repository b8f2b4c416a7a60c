import pytest

from corpus import fixture

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def load():
    return fixture


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
