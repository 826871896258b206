import numpy as np
import pytest

from spinlab import rng


@pytest.fixture
def gen():
    return rng.stream(20260810, "tests")


def finite_difference_gradient(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (f(x + e) - f(x - e)) / (2 * step)
    return out
