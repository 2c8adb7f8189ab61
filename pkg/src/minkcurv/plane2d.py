"""Normed planes: anti-norm, circular curvature and the 2D area inequality.

The area form is the standard determinant.  Closed curves are periodic in
t over [0, 2 pi), counterclockwise, and sampled on uniform grids, so the
trapezoid rule is spectrally accurate for every closed-curve integral here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import root

from . import norms
from .errors import InvalidInput, NonConvergence, NonPositiveCurvature
from .norms import NormGauge, level_set_curvature, support_points

TWO_PI = 2 * math.pi
FD_STEP_2D = 1e-4
DEFAULT_SAMPLES = 2048


def _rot(x):
    # J x with det(x, y) = <J x, y>
    x = np.asarray(x, dtype=float)
    return np.stack([-x[..., 1], x[..., 0]], -1)


def det2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


# ----------------------------------------------------------------------------
# plane norms


def plane_euclidean(radius=1.0):
    return norms.euclidean(radius, dim=2)


def plane_lp(p, delta=norms.DEFAULT_DELTA):
    return norms.lp(p, delta, dim=2)


def _check_plane(norm):
    if norm.dim != 2:
        raise InvalidInput(f"expected a plane norm, got dim={norm.dim}")


def antinorm(norm, x):
    """||x||_a = max over the unit circle S of det(x, y).

    det(x, y) = <Jx, y>, so the maximiser is the support point of B in the
    direction Jx and the value is the support function there.
    """
    _check_plane(norm)
    x = np.asarray(x, dtype=float)
    r = _rot(x)
    nr = np.linalg.norm(r, axis=-1)
    zero = nr == 0
    n = np.where(zero[..., None], np.array([1.0, 0.0]), r / np.where(zero, 1.0, nr)[..., None])
    y = support_points(norm, n)
    return np.where(zero, 0.0, nr * np.sum(y * n, -1))


def antinorm_bruteforce(norm, x, n=1_000_000):
    """max of det(x, S(theta)) over ``n`` equally spaced angles; a test oracle."""
    th = np.linspace(0, TWO_PI, n, endpoint=False)
    S = unit_circle_point(norm, th)
    return float(np.max(det2(np.asarray(x, dtype=float), S)))


def unit_circle_point(norm, theta):
    d = np.stack([np.cos(theta), np.sin(theta)], -1)
    return d / norm.value(d)[..., None]


def unit_circle_tangent(norm, theta):
    d = np.stack([np.cos(theta), np.sin(theta)], -1)
    dd = np.stack([-np.sin(theta), np.cos(theta)], -1)
    F = norm.value(d)[..., None]
    g = norm.grad(d)
    return dd / F - d * np.sum(g * dd, -1, keepdims=True) / F**2


def unit_circle_length(norm, n=DEFAULT_SAMPLES):
    """Minkowski length l(S) of the unit circle: integral of F(S'(theta))."""
    th = TWO_PI * np.arange(n) / n
    return float(np.mean(norm.value(unit_circle_tangent(norm, th))) * TWO_PI)


# ----------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class PlaneCurve:
    """Closed counterclockwise curve gamma(t), t in [0, 2 pi)."""

    point: Callable
    d1: Callable
    d2: Callable | None = None
    name: str = "curve"

    def second(self, t):
        if self.d2 is not None:
            return self.d2(t)
        h = 1e-5
        return (self.d1(t + h) - self.d1(t - h)) / (2 * h)


def ellipse(a, b):
    if a <= 0 or b <= 0:
        raise InvalidInput("ellipse semi-axes must be positive")
    return PlaneCurve(
        lambda t: np.stack([a * np.cos(t), b * np.sin(t)], -1),
        lambda t: np.stack([-a * np.sin(t), b * np.cos(t)], -1),
        lambda t: np.stack([-a * np.cos(t), -b * np.sin(t)], -1),
        name=f"ellipse({a}, {b})",
    )


def circle(r=1.0):
    return ellipse(r, r)


def norm_circle(norm, r=1.0):
    """r S: the circle of radius r of the plane norm itself."""
    _check_plane(norm)
    return PlaneCurve(lambda t: r * unit_circle_point(norm, t),
                      lambda t: r * unit_circle_tangent(norm, t),
                      None, name=f"{r}*S")


def _grid(n):
    return TWO_PI * np.arange(n) / n


# ----------------------------------------------------------------------------
# Birkhoff normal and circular curvature


def birkhoff_normal_2d(curve, norm, t):
    """Outward unit vector eta with eta Birkhoff-orthogonal to gamma'(t)."""
    g1 = curve.d1(t)
    nu = np.stack([g1[..., 1], -g1[..., 0]], -1)
    nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
    return support_points(norm, nu)


def circular_curvature(curve, norm, t, h=FD_STEP_2D):
    """k_c from eta' = k_c gamma', with eta' by central differences.

    The relation holds for any parameter, so the ratio taken in t equals the
    derivative dt/ds of the unit-circle parameter along Minkowski arc length.
    """
    _check_plane(norm)
    t = np.asarray(t, dtype=float)
    eta_p = birkhoff_normal_2d(curve, norm, t + h)
    eta_m = birkhoff_normal_2d(curve, norm, t - h)
    g1 = curve.d1(t)
    return np.sum((eta_p - eta_m) * g1, -1) / (2 * h * np.sum(g1 * g1, -1))


def curvature_ratio_2d(curve, norm, t):
    """kappa_gamma(t) / kappa_S(eta(t)), ratio of Euclidean curvatures."""
    g1, g2 = curve.d1(t), curve.second(t)
    kappa = det2(g1, g2) / np.linalg.norm(g1, axis=-1) ** 3
    return kappa / level_set_curvature(norm, birkhoff_normal_2d(curve, norm, t))


def osculating_radius(curve, norm, t, delta=1e-3):
    """Radius of the Minkowski circle through gamma(t - delta), gamma(t), gamma(t + delta)."""
    pts = curve.point(np.array([t - delta, t, t + delta]))
    k0 = float(circular_curvature(curve, norm, np.array([t]))[0])
    eta = birkhoff_normal_2d(curve, norm, np.array([t]))[0]
    c0 = pts[1] - eta / k0

    # equal distances to the outer points and the middle one; subtracting the
    # middle distance keeps the system well conditioned for small delta
    def eqs(c):
        F = norm.value(pts - c)
        return np.array([F[0] - F[1], F[2] - F[1]])

    sol = root(eqs, c0, method="hybr", tol=1e-15)
    rho = float(norm.value(pts[1] - sol.x))
    if np.max(np.abs(eqs(sol.x))) > 1e-9 * delta * max(rho, 1.0):
        raise NonConvergence(f"osculating circle: {sol.message}")
    return rho


# ----------------------------------------------------------------------------
# arc lengths and integral identities


@dataclass
class CurveProfile:
    t: np.ndarray
    s: np.ndarray          # Minkowski arc length
    s_a: np.ndarray        # anti-norm arc length
    k_c: np.ndarray
    speed: np.ndarray      # F(gamma')
    speed_a: np.ndarray    # ||gamma'||_a


def _cumulative_periodic(f, dt):
    # trapezoid cumulative integral on a uniform periodic grid, starting at 0
    return np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * dt)])


def curve_profile(curve, norm, n=DEFAULT_SAMPLES):
    t = _grid(n)
    g1 = curve.d1(t)
    speed = norm.value(g1)
    speed_a = antinorm(norm, g1)
    kc = circular_curvature(curve, norm, t)
    dt = TWO_PI / n
    return CurveProfile(t, _cumulative_periodic(speed, dt), _cumulative_periodic(speed_a, dt),
                        kc, speed, speed_a)


def arclength_parameter(curve, norm, kind="norm", n=DEFAULT_SAMPLES):
    """Monotone interpolant s -> t for Minkowski ("norm") or anti-norm ("anti") arc length.

    Returns (t_of_s, total length).
    """
    t = np.append(_grid(n), TWO_PI)
    g1 = curve.d1(t)
    speed = norm.value(g1) if kind == "norm" else antinorm(norm, g1)
    dt = TWO_PI / n
    s = _cumulative_periodic(speed, dt)
    # closing-interval correction keeps the total equal to the spectral trapezoid sum
    s *= float(np.sum(speed[:-1]) * dt) / s[-1]
    return PchipInterpolator(s, t), float(s[-1])


def total_circular_curvature(curve, norm, n=DEFAULT_SAMPLES):
    """Integral of k_c over Minkowski arc length."""
    t = _grid(n)
    return float(np.sum(circular_curvature(curve, norm, t) * norm.value(curve.d1(t))) * TWO_PI / n)


def enclosed_area(curve, n=DEFAULT_SAMPLES):
    t = _grid(n)
    return float(0.5 * np.sum(det2(curve.point(t), curve.d1(t))) * TWO_PI / n)


def area_curvature_bound(curve, norm, n=DEFAULT_SAMPLES, reparametrize=False):
    """(2 area, integral of 1/k_c in anti-norm arc length).

    With ``reparametrize`` the right side is integrated on a uniform grid in
    s_a through the monotone inverse t(s_a); otherwise by change of variables.
    """
    _check_plane(norm)
    t = _grid(n)
    kc = circular_curvature(curve, norm, t)
    if np.min(kc) <= 0:
        raise NonPositiveCurvature(f"circular curvature reaches {np.min(kc):.3e}")
    lhs = 2 * enclosed_area(curve, n)
    if reparametrize:
        t_of_s, la = arclength_parameter(curve, norm, "anti", n)
        m = 4 * n
        sa = la * (np.arange(m) + 0.5) / m
        rhs = float(np.sum(1.0 / circular_curvature(curve, norm, t_of_s(sa))) * la / m)
    else:
        rhs = float(np.sum(antinorm(norm, curve.d1(t)) / kc) * TWO_PI / n)
    return lhs, rhs


def plane_report(curve, norm, n=DEFAULT_SAMPLES):
    """The three 2D checks on one curve: total curvature, area bound, curvature-ratio oracle."""
    t = _grid(n)
    kc = circular_curvature(curve, norm, t)
    ratio = curvature_ratio_2d(curve, norm, t)
    total = total_circular_curvature(curve, norm, n)
    lS = unit_circle_length(norm, n)
    lhs, rhs = area_curvature_bound(curve, norm, n)
    return {
        "curve": curve.name,
        "total_circular_curvature": total,
        "unit_circle_length": lS,
        "total_curvature_error": abs(total - lS) / lS,
        "two_area": lhs,
        "int_inv_kc_ds_a": rhs,
        "area_bound_holds": bool(lhs <= rhs + 1e-6),
        "curvature_ratio_max_error": float(np.max(np.abs(kc - ratio) / np.abs(ratio))),
    }
