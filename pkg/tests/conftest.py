import numpy as np
import pytest

from znnfov import hermitian_split


def random_complex(n, seed):
    rng = np.random.default_rng(seed)
    return rng.random((n, n)) + 1j * rng.random((n, n))


def random_hermitian(n, seed):
    a = random_complex(n, seed)
    return (a + a.conj().T) / 2.0


def support_defect(points):
    """Worst violation of the per-angle support inequality: for a max-sweep
    each point must be extremal in its own direction e^{it}."""
    t = np.array([p.t for p in points])
    vals = np.array([p.value for p in points], dtype=complex)
    rotated = np.exp(-1j * t)[:, None] * (vals[None, :] - vals[:, None])
    return float(np.max(rotated.real))


@pytest.fixture
def jordan_flow():
    return hermitian_split(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
