import math

import numpy as np
import pytest

from minkcurv import measures, norms, surfaces
from minkcurv.errors import NonPositiveMeanCurvature


@pytest.fixture(scope="module")
def ell_l3(l3, ellipsoid):
    return measures.sample_surface(ellipsoid, l3)


@pytest.fixture(scope="module")
def torus_l4(l4, torus):
    return measures.sample_surface(torus, l4)


def test_grid_weights_integrate_sphere_area(euclid):
    atlas = surfaces.round_sphere(1.0)
    s = measures.sample_surface(atlas, euclid)
    assert s.integrate_e(1.0) == pytest.approx(4 * math.pi, rel=1e-8)
    # euclidean norm: omega equals the euclidean element
    np.testing.assert_allclose(s.omega, s.omega_e, rtol=1e-12)


def test_total_curvature_equals_sphere_area(any_norm, ellipsoid):
    lam = norms.sphere_area(any_norm)
    # the strongly anisotropic norms need more than the default level here
    assert measures.integral_K(ellipsoid, any_norm) == pytest.approx(lam, rel=1e-4)


def test_torus_total_curvature_vanishes(torus_l4):
    # positive and negative parts cancel on a genus-one surface
    pos = torus_l4.integrate(np.maximum(torus_l4.K, 0))
    assert abs(torus_l4.integrate(torus_l4.K)) < 1e-6 * pos


@pytest.mark.parametrize("name", ["ellipsoid", "torus"])
def test_flux_volume_is_norm_independent(name, l3, ellipsoid, torus):
    atlas = ellipsoid if name == "ellipsoid" else torus
    exact = 4 * math.pi * 1 * 1.5 * 2 / 3 if name == "ellipsoid" else 2 * math.pi**2 * 2 * 0.25
    assert measures.flux_volume(atlas, l3) == pytest.approx(exact, rel=1e-7)
    assert atlas.volume == pytest.approx(exact)


def test_alexandrov_residual(ell_l3, torus_l4):
    for s in (ell_l3, torus_l4):
        assert abs(s.integrate(1.0 - s.rho * s.H)) < 1e-5 * s.integrate(1.0)


def test_willmore_bound(ell_l3, torus_l4, l3, l4):
    assert ell_l3.integrate(ell_l3.H**2) >= norms.sphere_area(l3)
    assert torus_l4.integrate(torus_l4.H**2) >= norms.sphere_area(l4)


@pytest.mark.parametrize("r", [0.7, 2.0])
def test_norm_sphere_equalities(l4, r):
    atlas = surfaces.minkowski_sphere(l4, r)
    s = measures.sample_surface(atlas, l4)
    lam = norms.sphere_area(l4)
    assert s.integrate(1.0) == pytest.approx(r * r * lam, rel=1e-7)
    assert s.integrate(s.H**2) == pytest.approx(lam, rel=1e-7)
    assert s.integrate(1 / s.H) == pytest.approx(s.integrate(s.rho), rel=1e-7)


def test_inverse_mean_curvature_bound(ell_l3):
    assert ell_l3.integrate(1 / ell_l3.H) >= ell_l3.integrate(ell_l3.rho) - 1e-9


def test_inverse_mean_curvature_needs_positive_H(l4):
    # a fat torus has negative mean curvature on its inner equator
    with pytest.raises(NonPositiveMeanCurvature):
        measures.integral_invH(surfaces.torus(1.0, 0.6), l4)


def test_quadrature_converges_with_level(l4, torus):
    res = []
    for level in (1, 2):
        s = measures.sample_surface(torus, l4, measures.QuadratureGrid.for_atlas(torus, level))
        res.append(abs(s.integrate(1.0 - s.rho * s.H)))
    assert res[1] < res[0] / 20


def test_huber_ordering(l4, ellipsoid, torus):
    for atlas in (ellipsoid, torus):
        lo, val, hi = measures.huber_bounds(atlas, l4)
        assert lo <= val <= hi


def test_huber_collapses_for_euclidean(euclid, ellipsoid):
    lo, val, hi = measures.huber_bounds(ellipsoid, euclid)
    assert lo == pytest.approx(val, rel=1e-9)
    assert hi == pytest.approx(val, rel=1e-9)


def test_converged_area_matches_fixed_grid(l3, ellipsoid):
    grid = measures.QuadratureGrid.for_atlas(ellipsoid)
    a = measures.minkowski_area(ellipsoid, l3, grid)
    b = measures.minkowski_area(ellipsoid, l3, grid, tol=1e-9)
    assert a == pytest.approx(b, rel=1e-8)


def test_integrate_all_keys(l3, ellipsoid):
    out = measures.integrate_all(ellipsoid, l3)
    assert out["min_H"] > 0 and "int_invH" in out
    assert out["int_K"] == pytest.approx(out["lambda_dB"], rel=1e-6)
