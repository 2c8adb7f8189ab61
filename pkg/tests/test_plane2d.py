import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from minkcurv import plane2d
from minkcurv.errors import InvalidInput, NonPositiveCurvature

L4 = plane2d.plane_lp(4)
L3 = plane2d.plane_lp(3)
EUC = plane2d.plane_euclidean()

vec2 = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).map(np.array)


class TestAntinorm:
    def test_euclidean(self):
        assert plane2d.antinorm(EUC, np.array([1.0, 0.0])) == pytest.approx(1.0)
        assert plane2d.antinorm(EUC, np.array([3.0, -4.0])) == pytest.approx(5.0)

    def test_zero(self):
        assert plane2d.antinorm(L4, np.zeros(2)) == 0.0

    def test_brute_force(self):
        x = np.array([1.0, 1.0])
        assert plane2d.antinorm(L4, x) == pytest.approx(plane2d.antinorm_bruteforce(L4, x), rel=1e-9)

    @given(x=vec2, y=vec2, t=st.floats(0.01, 50))
    def test_is_a_norm(self, x, y, t):
        a = lambda z: float(plane2d.antinorm(L3, z))
        assert a(t * x) == pytest.approx(t * a(x), rel=1e-9, abs=1e-12)
        assert a(-x) == pytest.approx(a(x), rel=1e-9, abs=1e-12)
        assert a(x + y) <= a(x) + a(y) + 1e-9

    def test_requires_plane_norm(self, l4):
        with pytest.raises(InvalidInput):
            plane2d.antinorm(l4, np.array([1.0, 0.0]))


class TestCircularCurvature:
    def test_euclidean_circle(self):
        t = np.linspace(0, 6, 13)
        np.testing.assert_allclose(plane2d.circular_curvature(plane2d.circle(2.5), EUC, t), 0.4, rtol=1e-7)

    @pytest.mark.parametrize("norm", [L3, L4])
    def test_unit_circle_is_unit_curvature(self, norm):
        t = np.linspace(0, 6, 25)
        np.testing.assert_allclose(plane2d.circular_curvature(plane2d.norm_circle(norm), norm, t), 1.0,
                                   rtol=1e-7)

    def test_ratio_oracle_on_ellipse(self):
        curve = plane2d.ellipse(2, 1)
        t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        kc = plane2d.circular_curvature(curve, L4, t)
        np.testing.assert_allclose(kc, plane2d.curvature_ratio_2d(curve, L4, t), rtol=1e-5)
        assert kc.min() > 0

    @pytest.mark.parametrize("t", [0.0, 0.7, 2.0, 4.4])
    def test_osculating_circle_radius(self, t):
        curve = plane2d.ellipse(2, 1)
        kc = float(plane2d.circular_curvature(curve, L4, np.array([t]))[0])
        assert plane2d.osculating_radius(curve, L4, t) == pytest.approx(1 / kc, rel=1e-3)


class TestIntegrals:
    def test_euclidean_total_curvature(self):
        assert plane2d.total_circular_curvature(plane2d.ellipse(3, 1), EUC) == pytest.approx(2 * math.pi)

    @pytest.mark.parametrize("norm", [L3, L4])
    def test_total_curvature_is_circle_length(self, norm):
        lS = plane2d.unit_circle_length(norm)
        assert plane2d.total_circular_curvature(plane2d.ellipse(2, 1), norm) == pytest.approx(lS, rel=1e-7)
        assert plane2d.total_circular_curvature(plane2d.norm_circle(norm), norm) == pytest.approx(lS, rel=1e-7)

    def test_enclosed_area(self):
        assert plane2d.enclosed_area(plane2d.ellipse(2, 1)) == pytest.approx(2 * math.pi, rel=1e-12)

    def test_euclidean_circle_equality(self):
        lhs, rhs = plane2d.area_curvature_bound(plane2d.circle(1.5), EUC)
        assert lhs == pytest.approx(2 * math.pi * 1.5**2, rel=1e-10)
        assert rhs == pytest.approx(lhs, rel=1e-7)

    @pytest.mark.parametrize("r", [0.5, 2.0])
    def test_norm_circle_equality(self, r):
        lhs, rhs = plane2d.area_curvature_bound(plane2d.norm_circle(L4, r), L4)
        assert rhs == pytest.approx(lhs, rel=1e-6)

    def test_ellipse_strict_inequality(self):
        lhs, rhs = plane2d.area_curvature_bound(plane2d.ellipse(2, 1), L4)
        assert lhs < rhs - 1e-3

    def test_reparametrized_integral_agrees(self):
        curve = plane2d.ellipse(2, 1)
        _, a = plane2d.area_curvature_bound(curve, L4)
        _, b = plane2d.area_curvature_bound(curve, L4, reparametrize=True)
        assert a == pytest.approx(b, rel=1e-5)

    def test_arclength_inverse_is_monotone(self):
        t_of_s, total = plane2d.arclength_parameter(plane2d.ellipse(2, 1), L4, "anti")
        s = np.linspace(0, total, 200)
        assert np.all(np.diff(t_of_s(s)) > 0)
        assert t_of_s(total) == pytest.approx(2 * math.pi)

    def test_nonconvex_curve_rejected(self):
        # a limacon with an inner dent has negative curvature near t = pi
        curve = plane2d.PlaneCurve(
            lambda t: np.stack([(1 + 0.9 * np.cos(t)) * np.cos(t), (1 + 0.9 * np.cos(t)) * np.sin(t)], -1),
            lambda t: np.stack([-np.sin(t) - 1.8 * np.cos(t) * np.sin(t),
                                np.cos(t) + 0.9 * (np.cos(t) ** 2 - np.sin(t) ** 2)], -1))
        with pytest.raises(NonPositiveCurvature):
            plane2d.area_curvature_bound(curve, L4)

    def test_report(self):
        rep = plane2d.plane_report(plane2d.ellipse(2, 1), L4)
        assert rep["area_bound_holds"]
        assert rep["total_curvature_error"] < 1e-5
        assert rep["curvature_ratio_max_error"] < 1e-5
