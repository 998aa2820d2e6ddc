import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_quasi_projection(rng, n, defect_target):
    """Hermitian matrix whose eigenvalues sit near {0, 1} with a
    prescribed worst |mu^2 - mu|."""
    u = random_unitary(rng, n)
    base = rng.integers(0, 2, size=n).astype(float)
    # |mu^2 - mu| = |eta (1 + 2 eta')|... solve directly: push one
    # eigenvalue to the exact defect target, jitter the rest below it
    eta_max = 0.5 - np.sqrt(max(0.25 - defect_target, 0.0))
    eta = rng.uniform(0.0, eta_max, size=n)
    eta[0] = eta_max
    mu = base + np.where(base > 0.5, -eta, eta)
    return (u * mu) @ u.conj().T
