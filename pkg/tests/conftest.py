import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from finsleriso.mesh import build_icosphere

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture(scope="session")
def ico5():
    return build_icosphere(5)


@pytest.fixture(scope="session")
def ico4():
    return build_icosphere(4)


@pytest.fixture(scope="session")
def ico3():
    return build_icosphere(3)


def triangle_vertices(h):
    a = np.array([-0.5, 0.0])
    return np.array([a, a + h * np.array([2 / 3, 1.0]), a + h * np.array([2 / 3, -1.0])])
