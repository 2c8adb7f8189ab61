"""Birkhoff-Gauss map, its differential and the Minkowski curvatures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurvature, TangencyViolation
from .norms import level_set_curvature, support_points
from .surfaces import euclidean_gaussian_curvature, euclidean_normal

FD_STEP = 1e-4
TANGENCY_TOL = 1e-4
UMBILIC_GAP = 1e-6


@dataclass
class CurvatureSample:
    """Curvature data at one or many chart points (fields broadcast over the grid)."""

    point: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    shape: np.ndarray          # (..., 2, 2), d eta in the basis {phi_u, phi_v}
    lambda1: np.ndarray
    lambda2: np.ndarray
    K: np.ndarray
    H: np.ndarray
    omega: np.ndarray          # det(phi_u, phi_v, eta), oriented
    omega_e: np.ndarray        # |phi_u x phi_v|
    residual: np.ndarray       # out-of-plane part of d eta, relative

    @property
    def umbilic(self):
        # the gap is a square root of H^2 - K, so difference noise of size e
        # in the shape matrix shows up as sqrt(e) here
        scale = np.maximum(np.abs(self.H), 1.0)
        return np.abs(self.lambda1 - self.lambda2) < UMBILIC_GAP * scale


def birkhoff_normal(chart, norm, u, v):
    """eta = u(xi): the unit vector Birkhoff-orthogonal to the tangent plane, outward."""
    return support_points(norm, euclidean_normal(chart, u, v))


def eta_derivatives(chart, norm, u, v, h=None):
    """Central differences (eta_u, eta_v) of the Birkhoff normal in parameter space."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    h = FD_STEP * chart.scale if h is None else h
    us = np.stack([u + h, u - h, u, u])
    vs = np.stack([v, v, v + h, v - h])
    eta = birkhoff_normal(chart, norm, us, vs)
    return (eta[0] - eta[1]) / (2 * h), (eta[2] - eta[3]) / (2 * h)


def _project(pu, pv, eu, ev):
    J = np.stack([pu, pv], -1)                       # (..., 3, 2)
    G = np.swapaxes(J, -1, -2) @ J
    rhs = np.swapaxes(J, -1, -2) @ np.stack([eu, ev], -1)
    A = np.linalg.solve(G, rhs)
    out = np.stack([eu, ev], -1) - J @ A
    scale = np.maximum(np.linalg.norm(np.stack([eu, ev], -1), axis=-2), 1e-300)
    resid = np.max(np.linalg.norm(out, axis=-2) / scale, axis=-1)
    return A, resid


def shape_matrix(chart, norm, u, v, h=None, return_residual=False, refinements=3):
    """2x2 matrix A of d eta in the chart basis: d eta(phi_u) = A11 phi_u + A21 phi_v, ...

    Columns come from central differences of eta, projected onto
    span{phi_u, phi_v} by least squares.  The relative out-of-plane residual
    is a correctness monitor; if it exceeds ``TANGENCY_TOL`` the step is halved.
    """
    h = FD_STEP * chart.scale if h is None else h
    pu, pv = chart.d1(u, v)
    for _ in range(refinements + 1):
        eu, ev = eta_derivatives(chart, norm, u, v, h)
        A, resid = _project(pu, pv, eu, ev)
        if np.all(resid <= TANGENCY_TOL):
            break
        h *= 0.5
    else:
        raise TangencyViolation(f"d eta leaves the tangent plane (residual {np.max(resid):.2e})")
    return (A, resid) if return_residual else A


def principal_curvatures(A):
    K = np.linalg.det(A)
    H = 0.5 * np.trace(A, axis1=-2, axis2=-1)
    disc = H * H - K
    scale = np.maximum(np.abs(A).max(axis=(-2, -1)), 1.0) ** 2
    if np.any(disc < -1e-12 * scale):
        raise DegenerateCurvature("d eta has complex eigenvalues; it should be self-adjoint")
    root = np.sqrt(np.maximum(disc, 0.0))
    return H + root, H - root, K, H


def curvature_sample(chart, norm, u, v, h=None):
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    p = chart.point(u, v)
    pu, pv = chart.d1(u, v)
    xi = euclidean_normal(chart, u, v)
    eta = support_points(norm, xi)
    A, resid = shape_matrix(chart, norm, u, v, h=h, return_residual=True)
    l1, l2, K, H = principal_curvatures(A)
    cross = np.cross(pu, pv)
    omega = chart.orientation * np.sum(cross * eta, -1)
    return CurvatureSample(point=p, xi=xi, eta=eta, shape=A, lambda1=l1, lambda2=l2, K=K, H=H,
                           omega=omega, omega_e=np.linalg.norm(cross, axis=-1), residual=resid)


def curvature_ratio(chart, norm, u, v):
    """K_M(p) / K_dB(eta(p)): Minkowski Gauss curvature from two Euclidean ones."""
    eta = birkhoff_normal(chart, norm, u, v)
    kb = level_set_curvature(norm, eta)
    if np.any(kb <= 0):
        raise DegenerateCurvature("unit sphere curvature is not positive at eta(p)")
    return euclidean_gaussian_curvature(chart, u, v) / kb


# ----------------------------------------------------------------------------
# curvature as a limit of area ratios


def area_ratio(chart, norm, u, v, radius, n_r=12, n_t=32):
    """lambda_dB(eta(D)) / lambda_M(D) for the parameter disk D of given radius about (u, v)."""
    t, w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * radius * (t + 1)
    wr = 0.5 * radius * w * rho
    ang = 2 * np.pi * np.arange(n_t) / n_t
    R, T = np.meshgrid(rho, ang, indexing="ij")
    uu = u + R * np.cos(T)
    vv = v + R * np.sin(T)
    pu, pv = chart.d1(uu, vv)
    eta = birkhoff_normal(chart, norm, uu, vv)
    eu, ev = eta_derivatives(chart, norm, uu, vv)
    s = chart.orientation
    img = s * np.linalg.det(np.stack([eu, ev, eta], -1))
    dom = s * np.linalg.det(np.stack([pu, pv, eta], -1))
    W = wr[:, None] * np.ones_like(T)
    return float(np.sum(W * img) / np.sum(W * dom))


def area_ratio_limit(chart, norm, u, v, radii=(0.08, 0.04, 0.02)):
    """Richardson extrapolation (in radius^2) of the area ratio to radius -> 0.

    Returns (extrapolated value, per-radius ratios).
    """
    radii = np.asarray(radii, dtype=float)
    ratios = np.array([area_ratio(chart, norm, u, v, r) for r in radii])
    return richardson_r2(radii, ratios), ratios


def richardson_r2(radii, values):
    """Fit values = a0 + a1 r^2 + a2 r^4 + ... exactly and return a0."""
    r2 = np.asarray(radii, dtype=float) ** 2
    V = np.vander(r2, len(r2), increasing=True)
    return float(np.linalg.solve(V, np.asarray(values, dtype=float))[0])
