import pytest

_ACCEPTANCE_LINES = {}


class AcceptanceLog:
    def record(self, number, title, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return passed


@pytest.fixture(scope="session")
def acceptance_log():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
