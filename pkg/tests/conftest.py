from __future__ import annotations

import pytest

from upbv.families import tiles_34, upb_333, upb_444, upb_ddd

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def s333():
    return upb_333()


@pytest.fixture(scope="session")
def s444():
    return upb_444()


@pytest.fixture(scope="session")
def s555():
    return upb_ddd(5)


@pytest.fixture(scope="session")
def t34():
    return tiles_34()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
