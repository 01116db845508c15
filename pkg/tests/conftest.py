import pytest

_criteria = []


@pytest.fixture
def criterion():
    """Record one acceptance line; lines are printed in the terminal summary."""

    def record(label, ok, detail=""):
        _criteria.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)
