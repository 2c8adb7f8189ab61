import math

import numpy as np
import pytest

from minkcurv import birkhoff, geodesics, surfaces
from minkcurv.errors import FlatPoint, RayEscapedAtlas


def test_plane_circles_are_flat():
    chart = surfaces.plane_chart(1.0)
    fan = geodesics.geodesic_fan(chart, 0.0, 0.0, 0.3, n_dirs=64)
    assert fan.circumference == pytest.approx(2 * math.pi * 0.3, rel=1e-12)
    assert fan.area == pytest.approx(math.pi * 0.09, rel=1e-12)
    assert fan.speed_error < 1e-10


@pytest.mark.parametrize("r", [0.05, 0.3, 0.8])
def test_sphere_closed_forms(r):
    chart = surfaces.round_sphere(1.0).charts[0]
    c, a = geodesics.geodesic_circle(chart, 1.2, 0.4, r, n_dirs=64)
    assert c == pytest.approx(2 * math.pi * math.sin(r), rel=1e-9)
    assert a == pytest.approx(2 * math.pi * (1 - math.cos(r)), rel=1e-9)


def test_small_circle_expansion_on_ellipsoid(ellipsoid):
    # C(r) = 2 pi r - pi K r^3 / 3 + O(r^5)
    chart = ellipsoid.charts[0]
    u, v = 1.0, 0.6
    K = float(surfaces.euclidean_gaussian_curvature(chart, np.array(u), np.array(v)))
    r = 0.05
    c, _ = geodesics.geodesic_circle(chart, u, v, r)
    deficit = 2 * math.pi * r - c
    assert deficit == pytest.approx(math.pi * K * r**3 / 3, rel=1e-2)


@pytest.mark.parametrize("uv", [(1.0, 0.6), (2.2, 3.5)])
def test_bdp_on_ellipsoid(l4, ellipsoid, uv):
    res = geodesics.bdp_estimate(ellipsoid.charts[0], l4, *uv)
    assert res.K_circumference == pytest.approx(res.K_direct, rel=1e-2)
    assert res.K_area == pytest.approx(res.K_direct, rel=1e-2)
    assert 2.9 <= res.slope <= 3.1


def test_bdp_negative_curvature_on_torus(l3, torus):
    res = geodesics.bdp_estimate(torus.charts[0], l3, 2.8, 1.0)
    assert res.K_direct < 0
    assert res.K_circumference == pytest.approx(res.K_direct, rel=1e-2)


def test_bdp_matches_shape_operator(l3, ellipsoid):
    chart = ellipsoid.charts[1]
    res = geodesics.bdp_estimate(chart, l3, 1.3, 2.0)
    K = birkhoff.curvature_sample(chart, l3, np.array([1.3]), np.array([2.0])).K[0]
    assert res.K_direct == pytest.approx(K, rel=1e-8)
    assert set(res.as_dict()) >= {"radii", "deficits_M", "deficits_B", "slope"}


def test_flat_point_rejected(l4):
    with pytest.raises(FlatPoint):
        geodesics.bdp_estimate(surfaces.plane_chart(1.0), l4, 0.0, 0.0)


def test_ray_leaving_chart():
    with pytest.raises(RayEscapedAtlas):
        geodesics.geodesic_fan(surfaces.plane_chart(1.0), 0.9, 0.0, 0.5, n_dirs=16)


def test_deficit_slope():
    r = np.array([0.1, 0.05, 0.025])
    assert geodesics.deficit_slope(r, 2.0 * r**3) == pytest.approx(3.0)
