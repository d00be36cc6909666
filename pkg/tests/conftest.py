import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def sup(arr):
    return float(np.max(np.abs(np.asarray(arr, dtype=float))))


def fd_gradient(fn, x, h=1e-4):
    """5-point central finite-difference gradient of a scalar callable."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = 1.0
        out[k] = (fn(x - 2 * h * e) - 8 * fn(x - h * e)
                  + 8 * fn(x + h * e) - fn(x + 2 * h * e)) / (12 * h)
    return out
