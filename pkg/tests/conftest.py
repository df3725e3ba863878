import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from poisson_ccr.cone import orthant, wedge
from poisson_ccr.l2grid import Grid

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("repo")

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def line1():
    """1D orthant grid with unit cells: lambda(cell) = 1, cell i = [i, i+1)."""
    return Grid(orthant(1), (8,), (1.0,))


@pytest.fixture(scope="session")
def fine1():
    return Grid(orthant(1), (16,), (0.25,))


@pytest.fixture(scope="session")
def plane():
    return Grid(orthant(2), (6, 6), (0.5, 0.5))


@pytest.fixture(scope="session")
def wedge_grid():
    return Grid(wedge(), (6, 6), (0.5, 0.5), intensity=0.5)


def rel_err(x, y) -> float:
    return abs(complex(x) - complex(y)) / max(1.0, abs(complex(y)))


def poisson_moment(mean: float, fn, kmax: int = 200) -> complex:
    """E fn(N) for N ~ Poisson(mean) by direct summation of the pmf series."""
    total = 0j
    log_p = -mean
    for k in range(kmax):
        if k:
            log_p += math.log(mean) - math.log(k)
        total += math.exp(log_p) * fn(k)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
