import numpy as np
import pytest


def antisym(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) * scale
    return m - m.T


def sym(rng, n, scale=1.0):
    m = rng.normal(size=(n, n)) * scale
    return m + m.T


def random_T(rng, n):
    """Symmetric real part and a well conditioned positive definite imaginary part."""
    B = rng.normal(size=(n, n))
    return sym(rng, n, 0.5) + 1j * (B @ B.T + n * np.eye(n))


def random_general_T(rng, n):
    B = rng.normal(size=(n, n))
    return rng.normal(size=(n, n)) + 1j * (B @ B.T + 0.5 * np.eye(n))


def random_int_matrix(rng, n, lo=-3, hi=4, nonsingular=True):
    while True:
        A = rng.integers(lo, hi, size=(n, n)).astype(float)
        if not nonsingular or abs(np.linalg.det(A)) > 0.5:
            return A


def unimodular(rng, n):
    U = np.eye(n)
    for _ in range(n):
        i, j = rng.choice(n, size=2, replace=False)
        E = np.eye(n)
        E[i, j] = float(rng.choice([-1, 1]))
        U = U @ E
    return U


def twist_pair(rng, n):
    """(theta, Acal) with (1/2pi)^2 Acal^theta theta Acal^theta^T integral.

    The 2 x 2 integral pair is padded with a free theta row (Acal vanishes
    there) and moved by a unimodular change of basis.
    """
    from nctorus.holoside import integral_twist_example

    if n < 2:
        raise ValueError("pairs need n >= 2")
    m = int(rng.choice([1, 2, 3, -1, -2]))
    t2, a2 = integral_twist_example(m)
    theta = antisym(rng, n, 0.5)
    theta[:2, :2] = t2
    acal = np.zeros((n, n))
    acal[:2, :2] = a2
    U = unimodular(rng, n)
    Ui = np.linalg.inv(U)
    return Ui @ theta @ Ui.T, U.T @ acal @ U


def null_twist_pair(rng, n):
    """(theta, Acal) with Acal theta Acal = O: Acal is a multiple of v v^T."""
    theta = antisym(rng, n)
    v = rng.normal(size=n)
    return theta, float(rng.normal()) * np.outer(v, v)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
