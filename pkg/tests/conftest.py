import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240229)


def random_psd(rng, m, rank=None):
    A = rng.standard_normal((m, rank or m))
    return A @ A.T
