"""Shared probe builders for the test suite."""
import numpy as np
import pytest

from orthoweak.probe import GaussianProbe, grid_probe

DOMAIN = (-12.0, 12.0)
N = 4096


def grid_q(n=N, domain=DOMAIN):
    return domain[0] + (domain[1] - domain[0]) / n * np.arange(n)


def hermite1(sigma=1.0, n=N, domain=DOMAIN):
    q = grid_q(n, domain)
    return grid_probe(domain, q * np.exp(-q**2 / (4 * sigma**2)))


def skewed_mixture(n=N, domain=DOMAIN):
    """0.8 N(0, 1) + 0.6 N(2, 0.5) used as an amplitude."""
    q = grid_q(n, domain)

    def normal(m, s):
        return np.exp(-((q - m) ** 2) / (2 * s * s)) / (s * np.sqrt(2 * np.pi))

    return grid_probe(domain, 0.8 * normal(0, 1) + 0.6 * normal(2, 0.5))


def cubic_phase(c=0.1, n=N, domain=DOMAIN):
    q = grid_q(n, domain)
    return grid_probe(domain, GaussianProbe()(q) * np.exp(1j * c * q**3))


@pytest.fixture
def gaussian():
    return GaussianProbe(0.0, 1.0, 0.0)


@pytest.fixture
def mixture():
    return skewed_mixture()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
