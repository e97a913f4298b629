import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def phi_state(n: int) -> np.ndarray:
    """Density matrix of the maximally entangled state on C^n (x) C^n."""
    phi = sum(np.kron(np.eye(n)[:, i], np.eye(n)[:, i]) for i in range(n)) / np.sqrt(n)
    return np.outer(phi, phi)
