import numpy as np
import pytest


@pytest.fixture
def make_gmp():
    """Factory for random full-column-rank matrix pairs. Gaussian blocks of
    compatible shape are full rank with probability one and comfortably
    conditioned, which is what the exactness tests need."""

    def build(m, p, n, seed=0, scale_a=1.0):
        rng = np.random.default_rng(seed)
        a = scale_a * rng.standard_normal((m, n))
        l = rng.standard_normal((p, n))
        assert m + p >= n
        return a, l

    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
