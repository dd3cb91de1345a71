import numpy as np
import pytest

from hyperlag.constitutive.material import MaterialModel
from hyperlag.mesh.generate import structured_rectangle
from hyperlag.mesh.topology import Mesh


@pytest.fixture
def unit_square() -> Mesh:
    return structured_rectangle(0.0, 1.0, 0.0, 1.0, 4, 4, "alternate")


@pytest.fixture
def two_triangles() -> Mesh:
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return Mesh.from_arrays(nodes, [[0, 1, 2], [0, 2, 3]])


@pytest.fixture
def rubber() -> MaterialModel:
    return MaterialModel(rho0=1100.0, E=1.7e7, nu=0.45)


@pytest.fixture
def unit_material() -> MaterialModel:
    return MaterialModel(rho0=1.0, E=2.6, nu=0.3)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
