import numpy as np
import pytest

from qfdiv import linalg


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (Z + Z.conj().T)


def full_rank_pair(rng, n):
    return linalg.random_psd(n, None, None, rng), linalg.random_psd(n, None, None, rng)
