import math

import numpy as np
import pytest
from scipy.special import digamma as sp_digamma

from sycos.core import TimeSeriesPair


def brute_ksg(x, y, k=4, plus_one=True):
    """O(n^2) KSG reference: max norm, tie-inclusive neighbor set, closed strips."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = len(x)
    dxm = np.abs(x[:, None] - x[None, :])
    dym = np.abs(y[:, None] - y[None, :])
    dist = np.maximum(dxm, dym)
    np.fill_diagonal(dist, np.inf)
    kth = np.sort(dist, axis=1)[:, k - 1]
    inside = dist <= kth[:, None]
    ex = np.where(inside, dxm, 0).max(axis=1)
    ey = np.where(inside, dym, 0).max(axis=1)
    np.fill_diagonal(dxm, np.inf)
    np.fill_diagonal(dym, np.inf)
    nx = (dxm <= ex[:, None]).sum(axis=1)
    ny = (dym <= ey[:, None]).sum(axis=1)
    off = 1 if plus_one else 0
    return float(sp_digamma(k) - 1 / k - np.mean(sp_digamma(nx + off) + sp_digamma(ny + off))
                 + sp_digamma(n))


def gaussian_pair(rho, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    y = rho * x + math.sqrt(1 - rho ** 2) * rng.normal(size=n)
    return x, y


def gaussian_mi(rho):
    return -0.5 * math.log(1 - rho ** 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noise_pair(rng):
    return TimeSeriesPair(rng.normal(size=600), rng.normal(size=600))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
