import pytest

LINES = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(LINES, [])

    def record(number: int, ok: bool, detail: str) -> None:
        lines.append((number, f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"))
        print(lines[-1][1])
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    lines = terminalreporter.config.stash.get(LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
