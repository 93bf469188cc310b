from pathlib import Path

import pytest

GOLDEN = Path(__file__).parent / "golden"


def golden_sources():
    return sorted(GOLDEN.glob("*.sol"))


@pytest.fixture
def golden_dir():
    return GOLDEN


# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
