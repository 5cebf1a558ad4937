import sys

import pytest

from rgw.model import validate_law


@pytest.fixture
def half():
    """1/2 delta_0 + 1/2 delta_2."""
    return validate_law([0.5, 0.0, 0.5])


@pytest.fixture
def pair():
    """1/2 delta_1 + 1/2 delta_2."""
    return validate_law([0.0, 0.5, 0.5])


@pytest.fixture
def d2():
    return validate_law([0.0, 0.0, 1.0])


@pytest.fixture
def nu005():
    return validate_law([0.8, 0.05, 0.05, 0.05, 0.05])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
