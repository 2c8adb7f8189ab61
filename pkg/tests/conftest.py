import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from minkcurv import norms, surfaces

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TEST_NORMS = {
    "euclidean": lambda: norms.euclidean(),
    "l3": lambda: norms.lp(3),
    "l4": lambda: norms.lp(4),
    "superellipsoid": lambda: norms.superellipsoid(1, 1.2, 0.8, 4),
}


@pytest.fixture(scope="session", params=sorted(TEST_NORMS))
def any_norm(request):
    return TEST_NORMS[request.param]()


@pytest.fixture(scope="session")
def l3():
    return norms.lp(3)


@pytest.fixture(scope="session")
def l4():
    return norms.lp(4)


@pytest.fixture(scope="session")
def euclid():
    return norms.euclidean()


@pytest.fixture(scope="session")
def ellipsoid():
    return surfaces.ellipsoid(1, 1.5, 2)


@pytest.fixture(scope="session")
def torus():
    return surfaces.torus(2, 0.5)


def cell_grid(chart, n):
    """Cell-centred n x n parameter grid over a chart, flattened."""
    (u0, u1), (v0, v1) = chart.domain
    u = u0 + (u1 - u0) * (np.arange(n) + 0.5) / n
    v = v0 + (v1 - v0) * (np.arange(n) + 0.5) / n
    U, V = np.meshgrid(u, v, indexing="ij")
    return U.ravel(), V.ravel()
