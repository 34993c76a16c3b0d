import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asmvlc import build_channel_matrix, load_scenario  # noqa: E402


@pytest.fixture(scope="session")
def channels():
    return {n: build_channel_matrix(load_scenario(f"scenario{n}")) for n in range(1, 5)}


def random_channel(rng, n_t, n_r):
    """Gains in the same range as the bundled rooms."""
    return rng.uniform(1e-7, 2e-5, size=(n_r, n_t))


@pytest.fixture
def rng():
    return np.random.default_rng(20181015)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
