import math

import numpy as np
import pytest

from carleman_lcu.burgers import GridConfig, initial_state
from carleman_lcu.decomposition import decompose_full
from carleman_lcu.embedding import build_embedded_from_u0

# lines collected by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ref_grid():
    """Reference experiment: n_x = n_t = 4, alpha = 2, dt = 0.25, nu = 1."""
    return GridConfig(4, 4, 0.25, nu=1.0, alpha=2)


@pytest.fixture(scope="session")
def ref_u0(ref_grid):
    return initial_state(ref_grid, sigma=0.5, mu=math.pi)


@pytest.fixture(scope="session")
def ref_system(ref_grid, ref_u0):
    return build_embedded_from_u0(ref_grid, ref_u0)


@pytest.fixture(scope="session")
def ref_terms(ref_grid):
    return decompose_full(ref_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
