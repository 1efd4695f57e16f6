import numpy as np
import pytest

from sppcso.linalg import Dataset, standardize

ACCEPTANCE_LINES = []


def record_acceptance(number, name, passed, detail=""):
    ACCEPTANCE_LINES.append((number, f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name}"
                             + (f" -- {detail}" if detail else "")))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def random_data(n, p, seed, k=5, sigma=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[: min(k, p)] = rng.uniform(1, 2, min(k, p))
    y = X @ beta + sigma * rng.standard_normal(n)
    return standardize(Dataset(X, y))


def orthonormal_design(n, p, seed):
    """X with X'X / n = I exactly (up to rounding)."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return Q * np.sqrt(n)


@pytest.fixture
def small_data():
    return random_data(40, 8, seed=3)
