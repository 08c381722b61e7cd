import numpy as np
import pytest

from gsasel.designs import synthesize_panel
from gsasel.regression import Dataset


def random_dataset(rng, n, p, support=(), beta=1.0, noise=1.0, corr=0.0):
    """Gaussian design with optional equicorrelation and a known support."""
    cov = np.full((p, p), corr)
    np.fill_diagonal(cov, 1.0)
    X = rng.standard_normal((n, p)) @ np.linalg.cholesky(cov).T
    b = np.zeros(p)
    b[list(support)] = beta
    y = X @ b + noise * rng.standard_normal(n)
    return Dataset(y, X)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def panel():
    return synthesize_panel(0)


# (criterion, verdict, detail) rows filled by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, verdict, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {detail}")
