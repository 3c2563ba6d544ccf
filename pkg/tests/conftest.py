import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hyperclust import ConvergenceWarning

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def iris_path():
    return DATA / "iris.csv"


@pytest.fixture(autouse=True)
def _quiet_convergence():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        yield


def random_similarity(rng, n, density=1.0):
    """Symmetric matrix with entries in (0, 1] and a unit diagonal."""
    M = rng.uniform(0.01, 1.0, (n, n))
    if density < 1.0:
        M *= rng.random((n, n)) < density
    M = (M + M.T) / 2
    np.fill_diagonal(M, 1.0)
    return M


def random_spd(rng, n, shift=0.1):
    G = rng.standard_normal((n, n))
    return G @ G.T + shift * np.eye(n)
