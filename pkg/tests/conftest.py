import numpy as np
import pytest

from beatsync.motion import default_skeleton

from tests.helpers import ACCEPTANCE_LINES


@pytest.fixture(scope="session")
def skel():
    return default_skeleton()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
