"""Smooth strictly convex norms and the geometry of their unit spheres.

A norm is handled through its gauge function F (F(x) = ||x||) together with
the analytic gradient and Hessian.  Everything is vectorised over leading
axes: ``x`` may have shape ``(..., dim)``.

The ``lp`` family is regularised so that the unit sphere has strictly
positive Gaussian curvature everywhere::

    F(x) = ( sum_i (x_i**2 + delta*|x|**2) ** (p/2) ) ** (1/p)

``delta = 0`` gives the plain l^p norm, whose unit sphere is flat (zero
Gauss curvature) where it crosses the coordinate planes when p > 2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateCurvature, InvalidInput, NonConvergence

DEFAULT_DELTA = 0.2
NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class NormGauge:
    """Gauge F of a smooth, strictly convex, symmetric norm on R^dim.

    ``r_min``/``r_max`` bound the Euclidean radius of the unit sphere; they
    are estimated on a dense direction sample at construction and padded
    outward by ``1e-3`` relative so they can be used as safe bounds.
    """

    kind: str
    params: dict
    dim: int
    value_fn: Callable = field(repr=False)
    grad_fn: Callable = field(repr=False)
    hess_fn: Callable = field(repr=False)
    r_min: float = float("nan")
    r_max: float = float("nan")

    def value(self, x):
        return self.value_fn(np.asarray(x, dtype=float))

    def grad(self, x):
        return self.grad_fn(np.asarray(x, dtype=float))

    def hess(self, x):
        return self.hess_fn(np.asarray(x, dtype=float))

    __call__ = value

    def describe(self):
        return {"kind": self.kind, **self.params, "dim": self.dim}

    def scaled(self, c):
        """Norm whose unit ball is c·B, i.e. F_c(x) = F(x)/c."""
        c = float(c)
        return _finish(
            self.kind,
            {**self.params, "scale": self.params.get("scale", 1.0) * c},
            self.dim,
            lambda x: self.value_fn(x) / c,
            lambda x: self.grad_fn(x) / c,
            lambda x: self.hess_fn(x) / c,
        )


@dataclass(frozen=True)
class SpherePoint:
    """Point ``x`` on the unit sphere with outward Euclidean unit normal ``n``."""

    x: np.ndarray
    n: np.ndarray


# ----------------------------------------------------------------------------
# gauge families


def _euclid_parts(radius):
    def value(x):
        return np.linalg.norm(x, axis=-1) / radius

    def grad(x):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return x / (radius * r)

    def hess(x):
        r = np.linalg.norm(x, axis=-1)[..., None, None]
        xh = x[..., :, None] * x[..., None, :] / r**2
        eye = np.eye(x.shape[-1])
        return (eye - xh) / (radius * r)

    return value, grad, hess


def _lp_parts(p, delta):
    # g_i = sqrt(x_i^2 + delta |x|^2);  F = (sum g_i^p)^(1/p)
    def _g(x):
        s = np.sum(x * x, axis=-1, keepdims=True)
        return np.sqrt(x * x + delta * s)

    def value(x):
        g = _g(x)
        gmax = np.max(g, axis=-1, keepdims=True)
        return (gmax * np.sum((g / gmax) ** p, axis=-1, keepdims=True) ** (1.0 / p))[..., 0]

    def _dg(x, g):
        # rows i: grad g_i = (x_i e_i + delta x) / g_i, shape (..., dim, dim)
        dim = x.shape[-1]
        v = delta * x[..., None, :] * np.ones((dim, 1))
        idx = np.arange(dim)
        v[..., idx, idx] += x
        # g_i = 0 only for delta = 0 and x_i = 0, where the numerator vanishes too
        return v / np.where(g > 0, g, 1.0)[..., :, None]

    def grad(x):
        g = _g(x)
        F = value(x)[..., None]
        a = (g / F) ** (p - 1)
        dg = _dg(x, g)
        return np.einsum("...i,...ij->...j", a, dg)

    def hess(x):
        # hess F = (1/F) [ sum_i c_i ((p-2) dg_i dg_i^T + E_ii + delta I) + (1-p) dF dF^T ],
        # c_i = (g_i/F)^(p-2)
        dim = x.shape[-1]
        g = _g(x)
        F = value(x)[..., None]
        dg = _dg(x, g)
        gF = np.einsum("...i,...ij->...j", (g / F) ** (p - 1), dg)
        c = (g / F) ** (p - 2)
        h = (p - 2) * np.einsum("...i,...ij,...ik->...jk", c, dg, dg)
        idx = np.arange(dim)
        h[..., idx, idx] += c + delta * np.sum(c, axis=-1, keepdims=True)
        h += (1 - p) * gF[..., :, None] * gF[..., None, :]
        return h / F[..., None]

    return value, grad, hess


def _linear_pullback(parts, scales):
    # F(x) = G(D x) with D = diag(1/scales)
    value, grad, hess = parts
    d = 1.0 / np.asarray(scales, dtype=float)

    def v(x):
        return value(x * d)

    def gr(x):
        return grad(x * d) * d

    def he(x):
        return hess(x * d) * d[:, None] * d[None, :]

    return v, gr, he


def euclidean(radius=1.0, dim=3):
    if radius <= 0:
        raise InvalidInput("radius must be positive")
    return _finish("euclidean", {"radius": float(radius)} if radius != 1.0 else {}, dim,
                   *_euclid_parts(float(radius)))


def lp(p, delta=DEFAULT_DELTA, dim=3):
    p = float(p)
    if not 1.0 < p < math.inf:
        raise InvalidInput(f"lp exponent must lie in (1, inf), got {p}")
    if delta < 0:
        raise InvalidInput("delta must be non-negative")
    if p > 8:
        warnings.warn("lp norms with p > 8 are nearly flat at the poles; Newton solves degrade",
                      stacklevel=2)
    return _finish("lp", {"p": p, "delta": float(delta)}, dim, *_lp_parts(p, float(delta)))


def superellipsoid(a, b, c, p, delta=DEFAULT_DELTA):
    if min(a, b, c) <= 0:
        raise InvalidInput("superellipsoid semi-axes must be positive")
    base = lp(p, delta, dim=3)
    parts = _linear_pullback((base.value_fn, base.grad_fn, base.hess_fn), (a, b, c))
    return _finish("superellipsoid",
                   {"a": float(a), "b": float(b), "c": float(c), "p": float(p), "delta": float(delta)},
                   3, *parts)


def custom(value, grad, hess, dim=3, name="custom"):
    """Wrap user-supplied analytic gauge, gradient and Hessian."""
    return _finish(name, {}, dim, value, grad, hess)


def _directions(dim, n):
    if dim == 2:
        t = 2 * np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    # Fibonacci sphere
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    phi = np.pi * (1 + 5**0.5) * i
    s = np.sqrt(1 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=-1)


def _finish(kind, params, dim, value, grad, hess):
    probe = NormGauge(kind, params, dim, value, grad, hess)
    _validate(probe)
    d = _directions(dim, 20000 if dim == 3 else 4096)
    radii = 1.0 / probe.value(d)
    return NormGauge(kind, params, dim, value, grad, hess,
                     r_min=float(radii.min()) * (1 - 1e-3),
                     r_max=float(radii.max()) * (1 + 1e-3))


def _validate(norm):
    rng = np.random.default_rng(12345)
    x = rng.normal(size=(256, norm.dim))
    F = norm.value(x)
    if not np.all(F > 0):
        raise InvalidInput("gauge must be positive away from the origin")
    t = rng.uniform(0.1, 10.0, size=(256, 1))
    if not np.allclose(norm.value(t * x), t[:, 0] * F, rtol=1e-10, atol=0):
        raise InvalidInput("gauge is not positively homogeneous of degree 1")
    if not np.allclose(norm.value(-x), F, rtol=1e-12, atol=0):
        raise InvalidInput("gauge is not symmetric: F(-x) != F(x)")
    xs = x / F[:, None]
    g = norm.grad(xs)
    h2 = 2 * (g[:, :, None] * g[:, None, :] + norm.hess(xs))
    if np.min(np.linalg.eigvalsh(h2)) <= 0:
        raise InvalidInput("Hessian of F^2 is not positive definite (norm not smooth/strictly convex)")


# ----------------------------------------------------------------------------
# unit-sphere geometry


def support_points(norm, n, tol=1e-15, max_iter=NEWTON_MAX_ITER):
    """Vectorised inverse Gauss map: points x of the unit sphere with normal n.

    Solves F(y) grad F(y) = n by damped Newton (the Jacobian is the Hessian of
    F^2/2, positive definite for admissible norms) and returns x = y/F(y).
    """
    n = np.asarray(n, dtype=float)
    shape = n.shape
    n = n.reshape(-1, norm.dim)
    y = n / norm.value(n)[:, None]

    def residual(y):
        return norm.value(y)[:, None] * norm.grad(y) - n

    r = residual(y)
    rn = np.linalg.norm(r, axis=-1)
    for _ in range(max_iter):
        active = rn > tol
        if not np.any(active):
            break
        ya = y[active]
        g = norm.grad(ya)
        F = norm.value(ya)
        J = g[:, :, None] * g[:, None, :] + F[:, None, None] * norm.hess(ya)
        step = np.linalg.solve(J, -r[active][:, :, None])[..., 0]
        t = np.ones(len(ya))
        best_y, best_r = ya.copy(), rn[active].copy()
        cand = ya + step
        for _halving in range(30):
            cr = np.linalg.norm(norm.value(cand)[:, None] * norm.grad(cand) - n[active], axis=-1)
            ok = cr < best_r
            best_y[ok], best_r[ok] = cand[ok], cr[ok]
            if np.all(ok | (t < 1e-8)):
                break
            t = np.where(ok, t, 0.5 * t)
            cand = np.where(ok[:, None], cand, ya + t[:, None] * step)
        stalled = best_r >= rn[active]
        y[active] = best_y
        rn_new = rn.copy()
        rn_new[active] = best_r
        if np.all(stalled):
            rn = rn_new
            break
        rn = rn_new
        r = residual(y)
    x = y / norm.value(y)[:, None]
    g = norm.grad(x)
    align = np.linalg.norm(g / np.linalg.norm(g, axis=-1, keepdims=True) - n, axis=-1)
    if np.max(align) > 1e-12:
        raise NonConvergence(f"inverse Gauss map residual {np.max(align):.3e} after {max_iter} Newton steps")
    return x.reshape(shape)


def inverse_gauss_map(norm, n):
    """Point of the unit sphere whose outward Euclidean normal is ``n``."""
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n, axis=-1)
    if np.any(np.abs(nn - 1) > 1e-8):
        raise InvalidInput("normal must be a Euclidean unit vector")
    x = support_points(norm, n)
    return SpherePoint(x=x, n=n)


def support_function(norm, n):
    """h_B(n) = max <y, n> over the unit ball."""
    n = np.asarray(n, dtype=float)
    return np.sum(support_points(norm, n) * n, axis=-1)


def level_set_curvature(norm, x):
    """Euclidean Gauss curvature of the level set {F = F(x)} at x (curvature of the curve in 2D)."""
    x = np.asarray(x, dtype=float)
    g = norm.grad(x)
    h = norm.hess(x)
    dim = norm.dim
    border = np.zeros(x.shape[:-1] + (dim + 1, dim + 1))
    border[..., :dim, :dim] = h
    border[..., :dim, dim] = g
    border[..., dim, :dim] = g
    return -np.linalg.det(border) / np.linalg.norm(g, axis=-1) ** (dim + 1)


def sphere_curvature(norm, s):
    """Euclidean Gauss curvature of the unit sphere at ``s`` (SpherePoint or raw point)."""
    x = s.x if isinstance(s, SpherePoint) else np.asarray(s, dtype=float)
    k = level_set_curvature(norm, x)
    if np.any(k <= 0):
        raise DegenerateCurvature("unit sphere curvature is not positive; norm violates the standing assumption")
    return k


def sphere_area(norm, tol=1e-10, grid=None):
    """Area lambda(dB) of the unit sphere for the element det(X, Y, x)."""
    from .measures import QuadratureGrid, integrate_converged, sphere_area_on_grid
    from .surfaces import minkowski_sphere

    atlas = minkowski_sphere(norm, 1.0)
    if grid is not None:
        return sphere_area_on_grid(atlas, grid)
    return integrate_converged(lambda g: sphere_area_on_grid(atlas, g),
                               QuadratureGrid.for_atlas(atlas), tol=tol)


def cone_volume(norm, n_theta=96, n_phi=192):
    """Volume of the unit ball from the radial formula (1/3) int_{S^2} F(d)^-3 dsigma."""
    t, w = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * np.pi * (t + 1)
    wt = 0.5 * np.pi * w
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    d = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    f = norm.value(d) ** -3 * np.sin(T)
    return float(np.sum(f * wt[:, None]) * 2 * np.pi / n_phi / 3)
