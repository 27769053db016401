import pytest

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Shared sink for one summary line per acceptance criterion."""
    return _acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.line(line)
