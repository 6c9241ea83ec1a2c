import sys

import numpy as np
import pytest
import scipy.linalg


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def sqrtm_fidelity(rho, sigma):
    """Oracle: tr sqrt(sqrt(rho) sigma sqrt(rho)) via scipy's Schur-based sqrtm."""
    s = scipy.linalg.sqrtm(rho)
    return float(np.trace(scipy.linalg.sqrtm(s @ sigma @ s)).real)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
