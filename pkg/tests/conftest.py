import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_weights(rng, p, low=0.0, high=2.0):
    lam = np.sort(rng.uniform(low, high, p))[::-1]
    lam[0] = max(lam[0], 1e-3)
    return lam
