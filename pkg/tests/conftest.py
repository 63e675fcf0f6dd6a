from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"

# Acceptance lines collected during the run, printed in the terminal summary.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def record_acceptance():
    """Callable (number, ok, detail) that prints and stores one PASS/FAIL line."""

    def record(n: int, ok: bool, detail: str) -> None:
        line = f"ACCEPTANCE {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)

    return record
