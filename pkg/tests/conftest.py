import pytest

_LINES = []


@pytest.fixture(scope="session")
def acceptance():
    """Record one verdict line per acceptance criterion."""
    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        _LINES.append(line)
        print("\n" + line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
