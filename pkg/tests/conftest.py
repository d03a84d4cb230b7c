import pytest

_LINES = []


@pytest.fixture(scope="session")
def verdict():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def record(tag, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
