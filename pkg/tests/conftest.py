"""Shared fixtures for the test suite."""
import numpy as np
import pytest

from axitherm.materials import PiecewiseQuadratic, uniform_materials
from axitherm.mesh import SubdomainPolygon, generate_mesh, tag_boundaries


@pytest.fixture(scope="session")
def unit_square_mesh():
    poly = SubdomainPolygon(1, ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))
    mesh = generate_mesh([poly], 0.25)
    return tag_boundaries(mesh, [poly])


@pytest.fixture(scope="session")
def simple_materials():
    return uniform_materials(PiecewiseQuadratic.constant(10.0),
                             PiecewiseQuadratic.constant(2e9),
                             nu=0.3, alpha=1e-5, T0=300.0)


@pytest.fixture(scope="session")
def coarse_hearth_mesh():
    from axitherm.mesh import hearth_mesh
    return hearth_mesh(0.4)


@pytest.fixture(scope="session")
def hearth_materials():
    from axitherm.materials import build_hearth_materials
    return build_hearth_materials()


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
