import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240811))


def random_orthonormal(rng, n, k):
    """Orthonormal columns via QR of a Gaussian draw."""
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.diag(r))
