import numpy as np
import pytest

from blgrowth.datum import BLDatum
from blgrowth.subspace import Subspace


@pytest.fixture
def lw():
    """Loomis-Whitney datum on R^2 with p = (1, 1)."""
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]]), (1.0, 1.0))


@pytest.fixture
def lw_half(lw):
    return lw.with_p((0.5, 0.5))


@pytest.fixture
def reviewer():
    return BLDatum(2, ([[1.0, 0.0]], [[0.0, 1.0]], np.eye(2)), (0.25, 1.0, 0.5))


@pytest.fixture
def x_axis():
    return Subspace.coordinate(2, [0])


@pytest.fixture
def y_axis():
    return Subspace.coordinate(2, [1])


def random_projection_datum(rng, n=None, J=None, p=None):
    """Orthogonal projections with random kernels of random dimensions."""
    n = n or int(rng.integers(2, 5))
    J = J or int(rng.integers(1, 4))
    kernels = []
    for _ in range(J):
        k = int(rng.integers(0, n))
        q, _ = np.linalg.qr(rng.standard_normal((n, max(k, 1))))
        kernels.append(Subspace(q[:, :k]))
    if p is None:
        p = rng.random(J)
    return BLDatum.from_kernels(n, kernels, p)
