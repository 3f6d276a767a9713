import pytest

from comb_transversal import ErrorBudget, Grid, LinkGeometry, ProcessorSpec
from comb_transversal.signals import DIF, HT, INT, gaussian_pulse

FUNCTIONS = (DIF, INT, HT)
FAST_SEEDS = 5
FULL_SEEDS = 20


def pytest_addoption(parser):
    parser.addoption(
        "--full-mc",
        action="store_true",
        default=False,
        help="run the Monte-Carlo trend tests with 20 seeds instead of 5",
    )


@pytest.fixture(scope="session")
def seeds(request):
    n = FULL_SEEDS if request.config.getoption("--full-mc") else FAST_SEEDS
    return tuple(range(n))


@pytest.fixture(scope="session")
def geometry():
    return LinkGeometry()


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def pulse(grid):
    return grid.pulse()


@pytest.fixture(scope="session")
def wide_pulse():
    # broad enough for the trapezoidal integral to match the spectral derivative closely
    return gaussian_pulse(1.5e-9, 0.0, 1e-12, 16384)


@pytest.fixture(scope="session")
def zeroSpec():
    return ProcessorSpec(M=80, budget=ErrorBudget.zero())
