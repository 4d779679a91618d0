import numpy as np
import pytest

from PySSKLab.freeconv import FreeConvolution
from PySSKLab.measure import PointMass, make_jacobi
from PySSKLab.spectra import sample_matrix


@pytest.fixture(scope="session")
def uniform():
    return make_jacobi(0, 0)


@pytest.fixture(scope="session")
def jacobi2():
    return make_jacobi(2, 2)


@pytest.fixture(scope="session")
def jacobi12():
    return make_jacobi(12, 12)


@pytest.fixture(scope="session")
def semicircle():
    """μ_sc ⊞ λδ₀ is the semicircle law for every λ."""
    return FreeConvolution(PointMass(), 1.0)


@pytest.fixture(scope="session")
def fc2(jacobi2):
    return FreeConvolution(jacobi2, 2.0)


@pytest.fixture(scope="session")
def fc12(jacobi12):
    return FreeConvolution(jacobi12, 2.0)


@pytest.fixture(scope="session")
def sample12(jacobi12):
    return sample_matrix(jacobi12, 2.0, 200, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
