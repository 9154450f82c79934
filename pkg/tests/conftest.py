import numpy as np
import pytest

from bloch import bem, mesh
from bloch.lattice import cubic_lattice


@pytest.fixture(scope="session")
def cubic():
    return cubic_lattice()


@pytest.fixture(scope="session")
def sphere3():
    m = mesh.icosphere(3)
    return m, bem.assemble_adjoint_double_layer(m)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
