import numpy as np
import pytest

from kdv_gevrey import GridSpec


@pytest.fixture(scope="session")
def grid():
    return GridSpec()


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(128, 40.0 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_coeffs(grid, rng, n_modes=40, decay=0.3):
    """Random conjugate-symmetric coefficients with exponential decay."""
    c = np.zeros(grid.n_points, dtype=complex)
    k = np.arange(1, n_modes + 1)
    vals = (rng.normal(size=n_modes) + 1j * rng.normal(size=n_modes)) * np.exp(-decay * k)
    c[k] = vals
    c[-k] = np.conj(vals)
    c[0] = rng.normal()
    return c


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
