import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: list[tuple[int, str]] = []


@pytest.fixture
def criterion():
    """Record and print one ``[criterion N] PASS|FAIL ...`` line, then fail the test if needed."""

    def report(n: int, ok: bool, detail: str) -> None:
        line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}"
        _CRITERIA.append((n, line))
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA, key=lambda item: item[0]):
            terminalreporter.write_line(line)
