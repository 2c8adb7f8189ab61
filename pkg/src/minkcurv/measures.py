"""Quadrature of the Minkowski area element and the integral curvature functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .birkhoff import curvature_sample
from .errors import NonPositiveMeanCurvature, OrientationError, QuadratureNotConverged
from .norms import _directions, level_set_curvature, support_points
from .surfaces import euclidean_gaussian_curvature

GL_ORDER = 8
MAX_LEVELS = 4


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Legendre panels per chart; ``level`` doubles the panel counts."""

    panels: tuple          # one (n_u, n_v) pair per chart, at level 0
    order: int = GL_ORDER
    level: int = 0

    @classmethod
    def for_atlas(cls, atlas, level=1, panels=None):
        if panels is None:
            panels = tuple(_default_panels(ch) for ch in atlas.charts)
        return cls(tuple(tuple(p) for p in panels), GL_ORDER, level)

    def refined(self):
        return QuadratureGrid(self.panels, self.order, self.level + 1)

    def nodes(self, chart, index):
        nu, nv = (n * 2**self.level for n in self.panels[index])
        uu, wu = _panel_rule(*chart.domain[0], nu, self.order)
        vv, wv = _panel_rule(*chart.domain[1], nv, self.order)
        U, V = np.meshgrid(uu, vv, indexing="ij")
        W = wu[:, None] * wv[None, :] * chart.weight(U, V)
        return U, V, W


def _default_panels(chart):
    if chart.name.startswith("torus"):
        # multiples of 4 put panel edges on the K = 0 circles u = pi/2, 3pi/2
        return (8, 8)
    if chart.periodic[1]:
        return (4, 8)
    return (4, 4)


def _panel_rule(a, b, n_panels, order):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class SurfaceSampling:
    """Curvature data at every quadrature node of an atlas, flattened."""

    weights: np.ndarray
    point: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    K: np.ndarray
    H: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    omega: np.ndarray
    omega_e: np.ndarray
    K_M: np.ndarray
    K_dB: np.ndarray
    extras: dict = field(default_factory=dict)

    def integrate(self, density):
        """Sum of density * omega over the surface (density broadcast per node)."""
        return float(np.sum(self.weights * density * self.omega))

    def integrate_e(self, density):
        return float(np.sum(self.weights * density * self.omega_e))

    @property
    def rho(self):
        # affine distance to the origin
        return np.sum(self.point * self.xi, -1) / np.sum(self.eta * self.xi, -1)


def sample_surface(atlas, norm, grid=None):
    grid = grid or QuadratureGrid.for_atlas(atlas)
    parts = []
    for i, chart in enumerate(atlas.charts):
        U, V, W = grid.nodes(chart, i)
        keep = W != 0
        u, v, w = U[keep], V[keep], W[keep]
        cs = curvature_sample(chart, norm, u, v)
        km = euclidean_gaussian_curvature(chart, u, v)
        kb = level_set_curvature(norm, cs.eta)
        parts.append((w, cs, km, kb))
    cat = np.concatenate
    return SurfaceSampling(
        weights=cat([p[0] for p in parts]),
        point=cat([p[1].point for p in parts]),
        xi=cat([p[1].xi for p in parts]),
        eta=cat([p[1].eta for p in parts]),
        K=cat([p[1].K for p in parts]),
        H=cat([p[1].H for p in parts]),
        lambda1=cat([p[1].lambda1 for p in parts]),
        lambda2=cat([p[1].lambda2 for p in parts]),
        omega=cat([p[1].omega for p in parts]),
        omega_e=cat([p[1].omega_e for p in parts]),
        K_M=cat([p[2] for p in parts]),
        K_dB=cat([p[3] for p in parts]),
    )


def integrate_converged(fn, grid, tol=1e-7, max_levels=MAX_LEVELS):
    """Evaluate ``fn(grid)`` on successively doubled grids until the relative change < tol."""
    prev = fn(grid)
    for _ in range(max_levels):
        grid = grid.refined()
        cur = fn(grid)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureNotConverged(f"relative change {abs(cur - prev) / abs(cur):.2e} > {tol:.0e}")


def _sampling(surface, norm, grid, sampling):
    return sampling if sampling is not None else sample_surface(surface, norm, grid)


def sphere_area_on_grid(atlas, grid):
    """Integral of det(phi_u, phi_v, x) over an atlas of the unit sphere (eta = identity there)."""
    total = 0.0
    for i, chart in enumerate(atlas.charts):
        U, V, W = grid.nodes(chart, i)
        pu, pv = chart.d1(U, V)
        x = chart.point(U, V)
        total += float(np.sum(W * chart.orientation * np.linalg.det(np.stack([pu, pv, x], -1))))
    return total


def minkowski_area(surface, norm, grid=None, sampling=None, tol=None):
    """lambda_M = integral of omega.  With ``tol`` set, refines the grid until converged."""
    if tol is not None:
        return integrate_converged(lambda g: minkowski_area(surface, norm, g),
                                   grid or QuadratureGrid.for_atlas(surface), tol)
    s = _sampling(surface, norm, grid, sampling)
    return s.integrate(1.0)


def integral_K(surface, norm, grid=None, sampling=None):
    s = _sampling(surface, norm, grid, sampling)
    return s.integrate(s.K)


def integral_H(surface, norm, grid=None, sampling=None):
    s = _sampling(surface, norm, grid, sampling)
    return s.integrate(s.H)


def willmore_energy(surface, norm, grid=None, sampling=None):
    s = _sampling(surface, norm, grid, sampling)
    return s.integrate(s.H**2)


def integral_invH(surface, norm, grid=None, sampling=None):
    s = _sampling(surface, norm, grid, sampling)
    if np.min(s.H) <= 0:
        raise NonPositiveMeanCurvature(f"min H = {np.min(s.H):.3e}; 1/H is not integrable")
    return s.integrate(1.0 / s.H)


def flux_volume(surface, norm, grid=None, sampling=None):
    """(1/3) integral of rho * omega, the volume enclosed by the surface."""
    s = _sampling(surface, norm, grid, sampling)
    vol = s.integrate(s.rho) / 3.0
    if vol < 0:
        raise OrientationError("flux volume is negative; the Birkhoff normal is not outward")
    return vol


def alexandrov_residual(surface, norm, grid=None, sampling=None):
    """Integral of (1 - rho H) omega; zero on every closed surface."""
    s = _sampling(surface, norm, grid, sampling)
    return s.integrate(1.0 - s.rho * s.H)


def sphere_extrema(norm, n=20000):
    """(min, max) of <u(n), n> and of K_dB over a dense sample of the unit sphere."""
    d = _directions(3, n)
    x = support_points(norm, d)
    h = np.sum(x * d, -1)
    k = level_set_curvature(norm, x)
    return (h.min(), h.max()), (k.min(), k.max())


def huber_bounds(surface, norm, grid=None, sampling=None, n_dense=20000):
    """(lower, integral of K+ omega, upper) with K+ from the curvature-ratio formula.

    Extrema of <eta, xi> and K_dB combine a dense sample of the unit sphere with
    the values met on the surface itself, so the bounds hold node by node.
    """
    s = _sampling(surface, norm, grid, sampling)
    (hmin, hmax), (kmin, kmax) = sphere_extrema(norm, n_dense)
    ex = np.sum(s.eta * s.xi, -1)
    hmin, hmax = min(hmin, ex.min()), max(hmax, ex.max())
    kmin, kmax = min(kmin, s.K_dB.min()), max(kmax, s.K_dB.max())
    kplus_e = s.integrate_e(np.maximum(s.K_M, 0.0))
    value = s.integrate(np.maximum(s.K_M / s.K_dB, 0.0))
    lower = hmin / kmax * kplus_e
    upper = hmax / kmin * kplus_e
    return lower, value, upper


def integrate_all(surface, norm, grid=None, lambda_dB=None):
    """Every integral functional from a single sampling of the surface."""
    s = sample_surface(surface, norm, grid)
    out = {
        "lambda_M": s.integrate(1.0),
        "int_K": s.integrate(s.K),
        "int_H": s.integrate(s.H),
        "willmore": s.integrate(s.H**2),
        "flux_volume": s.integrate(s.rho) / 3.0,
        "alexandrov_residual": s.integrate(1.0 - s.rho * s.H),
        "huber": list(huber_bounds(surface, norm, sampling=s)),
        "min_H": float(np.min(s.H)),
        "H_mean": float(np.sum(s.weights * s.H * s.omega) / np.sum(s.weights * s.omega)),
        "H_std": _weighted_std(s.H, s.weights * s.omega),
    }
    if out["min_H"] > 0:
        out["int_invH"] = s.integrate(1.0 / s.H)
    if lambda_dB is None:
        from .norms import sphere_area
        lambda_dB = sphere_area(norm)
    out["lambda_dB"] = lambda_dB
    return out


def _weighted_std(x, w):
    m = np.sum(w * x) / np.sum(w)
    return float(math.sqrt(max(np.sum(w * (x - m) ** 2) / np.sum(w), 0.0)))
