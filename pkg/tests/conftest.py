import numpy as np
import pytest

from fibrebend.geometry import GeometryAParams, GeometryBParams, build_geometry_a, build_geometry_b
from fibrebend.materials import default_library
from fibrebend.mechanics import SegmentModel


@pytest.fixture(scope="session")
def spec_a():
    return build_geometry_a(GeometryAParams())


@pytest.fixture(scope="session")
def spec_b():
    return build_geometry_b(GeometryBParams())


@pytest.fixture(scope="session")
def spec_b_layered():
    return build_geometry_b(GeometryBParams(with_fabric_layer=True))


@pytest.fixture(scope="session")
def library():
    return default_library()


@pytest.fixture(scope="session")
def seg():
    return SegmentModel()


@pytest.fixture(autouse=True)
def _fixed_seed():
    np.random.seed(0)
