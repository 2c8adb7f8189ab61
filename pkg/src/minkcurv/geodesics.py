"""Euclidean geodesic circles and Bertrand-Diguet-Puiseux curvature estimates.

Rays are integrated in chart coordinates for the induced Euclidean metric.
The geodesic equation is written as the tangential projection of the
ambient acceleration, u'' = -(J^T J)^{-1} J^T (phi_uu u'^2 + 2 phi_uv u' v' + phi_vv v'^2),
which avoids forming Christoffel symbols explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .birkhoff import birkhoff_normal, richardson_r2, shape_matrix
from .errors import FlatPoint, RayEscapedAtlas, StepSizeUnderflow
from .surfaces import euclidean_principal_curvatures, minkowski_sphere

N_DIRS = 256
RTOL = 1e-11
ATOL = 1e-14
N_RADIAL = 10
DEFAULT_FRACTIONS = (0.08, 0.04, 0.02)
NOISE_FLOOR = 1e-12


@dataclass
class GeodesicFan:
    """Geodesic rays of length r from one point in ``n_dirs`` equally spaced directions."""

    center: np.ndarray
    radius: float
    theta: np.ndarray
    rho: np.ndarray               # radial Gauss-Legendre nodes in (0, r)
    rho_weights: np.ndarray
    points: np.ndarray            # (len(rho) + 1, n_dirs, 3); last row at rho = r
    speed_error: float            # max | |d phi(ray)/ds| - 1 | along the rays
    stats: dict = field(default_factory=dict)

    def polar_metric(self):
        """sqrt(G)(rho, theta) = |d/dtheta ray(rho, theta)| by spectral differentiation."""
        n = len(self.theta)
        k = np.fft.fftfreq(n, d=1.0 / n)
        k[n // 2] = 0.0
        dP = np.fft.ifft(1j * k[None, :, None] * np.fft.fft(self.points, axis=1), axis=1).real
        return np.linalg.norm(dP, axis=-1)

    @property
    def circumference(self):
        return float(np.mean(self.polar_metric()[-1]) * 2 * math.pi)

    @property
    def area(self):
        g = self.polar_metric()[:-1]
        return float(np.sum(self.rho_weights[:, None] * g) * 2 * math.pi / len(self.theta))


def _unit_directions(chart, u0, v0, theta):
    pu, pv = chart.d1(np.array(u0), np.array(v0))
    e1 = pu / np.linalg.norm(pu)
    e2 = pv - np.dot(pv, e1) * e1
    e2 /= np.linalg.norm(e2)
    dirs = np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2
    J = np.stack([pu, pv], -1)
    w = np.linalg.solve(J.T @ J, J.T @ dirs.T).T
    return w


def geodesic_fan(chart, u0, v0, r, n_dirs=N_DIRS, n_radial=N_RADIAL, rtol=RTOL, atol=ATOL):
    """Integrate the geodesic rays from phi(u0, v0) up to arc length r."""
    theta = 2 * math.pi * np.arange(n_dirs) / n_dirs
    w0 = _unit_directions(chart, u0, v0, theta)
    x, wx = np.polynomial.legendre.leggauss(n_radial)
    rho = 0.5 * r * (x + 1)
    rw = 0.5 * r * wx

    def rhs(_s, y):
        du, dv, pu_dot, pv_dot = y.reshape(4, n_dirs)
        u, v = u0 + du, v0 + dv
        pu, pv = chart.d1(u, v)
        puu, puv, pvv = chart.d2(u, v)
        acc = puu * (pu_dot**2)[:, None] + 2 * puv * (pu_dot * pv_dot)[:, None] + pvv * (pv_dot**2)[:, None]
        J = np.stack([pu, pv], -1)
        G = np.swapaxes(J, -1, -2) @ J
        b = np.einsum("nij,ni->nj", J, acc)
        dd = -np.linalg.solve(G, b[..., None])[..., 0]
        return np.concatenate([pu_dot, pv_dot, dd[:, 0], dd[:, 1]])

    y0 = np.concatenate([np.zeros(n_dirs), np.zeros(n_dirs), w0[:, 0], w0[:, 1]])
    sol = solve_ivp(rhs, (0.0, r), y0, method="RK45", t_eval=np.append(rho, r),
                    rtol=rtol, atol=atol * max(r, 1e-300), max_step=r / 16, dense_output=False)
    if sol.status != 0:
        raise StepSizeUnderflow(f"geodesic integration failed: {sol.message}")
    Y = sol.y.reshape(4, n_dirs, -1)
    U, V = u0 + Y[0].T, v0 + Y[1].T           # (n_s, n_dirs)
    if not np.all(chart.contains_params(U, V)):
        raise RayEscapedAtlas(f"a geodesic ray of length {r} leaves the chart {chart.name}")
    pts = chart.point(U, V)
    pu, pv = chart.d1(U, V)
    vel = pu * Y[2].T[..., None] + pv * Y[3].T[..., None]
    speed_err = float(np.max(np.abs(np.linalg.norm(vel, axis=-1) - 1.0)))
    return GeodesicFan(chart.point(np.array(u0), np.array(v0)), float(r), theta, rho, rw, pts,
                       speed_err, {"nfev": int(sol.nfev)})


def geodesic_circle(chart, u0, v0, r, n_dirs=N_DIRS):
    """(circumference, area) of the Euclidean geodesic circle of radius r about phi(u0, v0)."""
    fan = geodesic_fan(chart, u0, v0, r, n_dirs)
    return fan.circumference, fan.area


# ----------------------------------------------------------------------------
# BDP estimates


@dataclass
class BDPResult:
    K_direct: float
    K_circumference: float
    K_area: float
    radii: list
    ratios_circumference: list
    ratios_area: list
    deficits_M: list
    deficits_B: list
    slope: float
    eta: list
    unit_sphere_chart: tuple

    def as_dict(self):
        return dict(self.__dict__)


def local_curvature_radius(chart, u, v):
    k1, k2 = euclidean_principal_curvatures(chart, np.array(u), np.array(v))
    k = max(abs(float(k1)), abs(float(k2)))
    return math.inf if k == 0 else 1.0 / k


def deficit_slope(radii, deficits):
    """Least-squares slope of log|deficit| against log r."""
    return float(np.polyfit(np.log(radii), np.log(np.abs(deficits)), 1)[0])


def bdp_estimate(chart, norm, u, v, radii=None, n_dirs=N_DIRS, unit_sphere=None):
    """K(p) as the limit of (2 pi r - C_M(p, r)) / (2 pi r - C_dB(eta(p), r)).

    The circles on the unit sphere are centred at eta(p) and use the same r.
    Default radii are fixed fractions of the smaller local curvature radius of
    the two surfaces; ratios are extrapolated to r = 0 in powers of r^2.  The
    area variant (pi r^2 - A_M) / (pi r^2 - A_dB) is returned alongside.
    """
    sphere = unit_sphere if unit_sphere is not None else minkowski_sphere(norm, 1.0)
    eta = birkhoff_normal(chart, norm, np.array(u), np.array(v))
    k, ub, vb = sphere.locate(eta)
    bchart = sphere.charts[k]
    if radii is None:
        R = min(local_curvature_radius(chart, u, v), local_curvature_radius(bchart, ub, vb))
        if not math.isfinite(R):
            raise FlatPoint("surface is flat at p; the circumference deficit vanishes")
        radii = [f * R for f in DEFAULT_FRACTIONS]
    radii = np.asarray(radii, dtype=float)
    cM, cB, aM, aB = [], [], [], []
    for r in radii:
        fm = geodesic_fan(chart, u, v, r, n_dirs)
        fb = geodesic_fan(bchart, ub, vb, r, n_dirs)
        cM.append(2 * math.pi * r - fm.circumference)
        cB.append(2 * math.pi * r - fb.circumference)
        aM.append(math.pi * r * r - fm.area)
        aB.append(math.pi * r * r - fb.area)
    cM, cB, aM, aB = map(np.asarray, (cM, cB, aM, aB))
    if np.all(np.abs(cM) < NOISE_FLOOR * radii):
        raise FlatPoint("circumference deficit is below the noise floor at every radius")
    rc = cM / cB
    ra = aM / aB
    A = shape_matrix(chart, norm, np.array(u), np.array(v))
    return BDPResult(
        K_direct=float(np.linalg.det(A)),
        K_circumference=richardson_r2(radii, rc),
        K_area=richardson_r2(radii, ra),
        radii=radii.tolist(),
        ratios_circumference=rc.tolist(),
        ratios_area=ra.tolist(),
        deficits_M=cM.tolist(),
        deficits_B=cB.tolist(),
        slope=deficit_slope(radii, cM),
        eta=eta.tolist(),
        unit_sphere_chart=(int(k), float(ub), float(vb)),
    )
