import math

import numpy as np
import pytest

from trapfluor.model import PhysParams, StandingWave

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return a + a.conj().T


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def node_params(**kw):
    base = dict(eta=0.05, psi=math.radians(200), drive=StandingWave(math.pi / 2))
    base.update(kw)
    return PhysParams(**base)


def mollow_by_solve(liou, sigma, steady, grid):
    """Inelastic two-level spectrum from one dense solve per frequency."""
    d = steady.shape[0]
    mat = liou.matrix - np.outer(steady.reshape(-1, order="F"), np.eye(d).reshape(-1, order="F"))
    mean = np.trace(sigma @ steady)
    b = (sigma @ steady - steady * mean).reshape(-1, order="F")
    c = sigma.conj().reshape(-1, order="F")
    out = []
    for w in grid:
        y = np.linalg.solve(1j * w * np.eye(d * d) - mat, b)
        out.append(np.real(c @ y))
    return np.array(out)
