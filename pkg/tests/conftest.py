import numpy as np
import pytest

from eqtoeplitz.geometry import ProjectiveModel
from eqtoeplitz.symmetry import TorusAction


@pytest.fixture(scope="session")
def p1():
    return ProjectiveModel(1)


@pytest.fixture(scope="session")
def p2():
    return ProjectiveModel(2)


@pytest.fixture(scope="session")
def trivial_g1():
    return TorusAction(np.zeros((0, 2), dtype=np.int64))


@pytest.fixture(scope="session")
def trivial_g2():
    return TorusAction(np.zeros((0, 3), dtype=np.int64))


@pytest.fixture(scope="session")
def circle_p1():
    return TorusAction([[1, -1]])


@pytest.fixture(scope="session")
def circle_p2():
    return TorusAction([[1, -1, -1]])


def plain_sphere(n, d, rng):
    """Independent sampling oracle: plain-RNG uniform sphere points, kept
    deliberately separate from the package's quasi-random sampler."""
    z = rng.standard_normal((n, d + 1)) + 1j * rng.standard_normal((n, d + 1))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
