import numpy as np
import pytest

from nlham.atom import random_atom
from nlham.media import PermittivityModel


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def atom3(rng):
    return random_atom(rng)


@pytest.fixture
def lossy_host():
    return PermittivityModel.single(1.0, 2.0, 0.3)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
