import numpy as np
import pytest

from laprep.chain import stationary_distribution
from laprep.synthetic import random_ergodic_chain


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_state():
    """Symmetric 2-state chain with r = (1, 0)."""
    return np.array([[0.5, 0.5], [0.5, 0.5]]), np.array([1.0, 0.0])


@pytest.fixture
def reversible_two_state():
    return np.array([[0.9, 0.1], [0.5, 0.5]]), np.array([5 / 6, 1 / 6])


@pytest.fixture
def random_chain(rng):
    def make(n):
        P = random_ergodic_chain(n, rng)
        return P, stationary_distribution(P)

    return make


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one status line per acceptance criterion for the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
