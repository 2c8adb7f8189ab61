"""Parametrised surface patches, closed-surface atlases and built-in shapes.

Charts evaluate vectorised over parameter arrays ``u, v`` of equal shape and
return arrays of shape ``u.shape + (3,)``.  Built-in charts supply analytic
first and second derivatives; custom charts fall back to central finite
differences.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateChart, InvalidInput

EPS = np.finfo(float).eps
H_FD1 = EPS ** (1 / 3)
H_FD2 = EPS ** (1 / 4)


class SurfaceChart:
    """Immersion phi: [u0, u1] x [v0, v1] -> R^3.

    ``orientation`` is +1 when phi_u x phi_v is the outward (positive) side
    and -1 otherwise.  ``scale`` is the typical length of the parameter
    domain; finite-difference steps are proportional to it.
    """

    def __init__(self, point, d1=None, d2=None, domain=((0.0, 1.0), (0.0, 1.0)),
                 periodic=(False, False), orientation=1, scale=1.0, name="chart"):
        self._point = point
        self._d1 = d1
        self._d2 = d2
        self.domain = tuple(tuple(float(t) for t in d) for d in domain)
        self.periodic = tuple(bool(p) for p in periodic)
        self.orientation = 1 if orientation >= 0 else -1
        self.scale = float(scale)
        self.name = name

    def point(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        return self._point(u, v)

    def d1(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if self._d1 is not None:
            return self._d1(u, v)
        h = H_FD1 * self.scale
        pu = (self._point(u + h, v) - self._point(u - h, v)) / (2 * h)
        pv = (self._point(u, v + h) - self._point(u, v - h)) / (2 * h)
        return pu, pv

    def d2(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if self._d2 is not None:
            return self._d2(u, v)
        h = H_FD2 * self.scale
        P = self._point
        p0 = P(u, v)
        puu = (P(u + h, v) - 2 * p0 + P(u - h, v)) / h**2
        pvv = (P(u, v + h) - 2 * p0 + P(u, v - h)) / h**2
        puv = (P(u + h, v + h) - P(u + h, v - h) - P(u - h, v + h) + P(u - h, v - h)) / (4 * h * h)
        return puu, puv, pvv

    def weight(self, u, v):
        return np.ones(np.broadcast(np.asarray(u), np.asarray(v)).shape)

    def scaled(self, c):
        """Chart of the homothetic image c * M."""
        return ScaledChart(self, c)

    def contains_params(self, u, v):
        (u0, u1), (v0, v1) = self.domain
        ok_u = np.ones(np.shape(u), bool) if self.periodic[0] else (u >= u0) & (u <= u1)
        ok_v = np.ones(np.shape(v), bool) if self.periodic[1] else (v >= v0) & (v <= v1)
        return ok_u & ok_v


class ScaledChart(SurfaceChart):
    def __init__(self, base, c):
        self.base = base
        self.c = float(c)
        super().__init__(lambda u, v: self.c * base.point(u, v),
                         lambda u, v: tuple(self.c * a for a in base.d1(u, v)),
                         lambda u, v: tuple(self.c * a for a in base.d2(u, v)),
                         base.domain, base.periodic, base.orientation, base.scale,
                         name=f"{self.c}*{base.name}")

    def weight(self, u, v):
        return self.base.weight(u, v)


# ----------------------------------------------------------------------------
# differential quantities


def _cross(a, b):
    return np.cross(a, b)


def oriented_area_vector(chart, u, v):
    pu, pv = chart.d1(u, v)
    return chart.orientation * _cross(pu, pv)


def euclidean_normal(chart, u, v):
    """Unit normal xi, outward according to the chart orientation."""
    n = oriented_area_vector(chart, u, v)
    nn = np.linalg.norm(n, axis=-1, keepdims=True)
    if np.any(nn < 1e-8):
        raise DegenerateChart("phi_u x phi_v vanishes: chart is not an immersion here")
    return n / nn


def fundamental_forms(chart, u, v):
    """(E, F, G, L, M, N) with the second form taken against the outward normal."""
    pu, pv = chart.d1(u, v)
    puu, puv, pvv = chart.d2(u, v)
    xi = euclidean_normal(chart, u, v)
    E = np.sum(pu * pu, -1)
    F = np.sum(pu * pv, -1)
    G = np.sum(pv * pv, -1)
    L = np.sum(puu * xi, -1)
    M = np.sum(puv * xi, -1)
    N = np.sum(pvv * xi, -1)
    return E, F, G, L, M, N


def euclidean_gaussian_curvature(chart, u, v):
    E, F, G, L, M, N = fundamental_forms(chart, u, v)
    return (L * N - M * M) / (E * G - F * F)


def euclidean_principal_curvatures(chart, u, v):
    """Principal curvatures (k1 >= k2), positive on the outward-convex side."""
    E, F, G, L, M, N = fundamental_forms(chart, u, v)
    det = E * G - F * F
    K = (L * N - M * M) / det
    H = -(E * N - 2 * F * M + G * L) / (2 * det)
    disc = np.sqrt(np.maximum(H * H - K, 0.0))
    return H + disc, H - disc


# ----------------------------------------------------------------------------
# spherical-image charts (ellipsoids, Minkowski spheres)

_AXIS_FRAMES = {
    "z": np.eye(3),
    # local (a, b, c) -> world (c, a, b); cyclic, so orientation is kept
    "x": np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
}

BLEND_T0 = 0.0
BLEND_T1 = 0.95
THETA_CUT = math.acos(math.sqrt(BLEND_T1))


def _smooth_cutoff(t, t0=BLEND_T0, t1=BLEND_T1):
    """C-infinity step: 1 for t <= t0, 0 for t >= t1."""
    s = np.clip((np.asarray(t, dtype=float) - t0) / (t1 - t0), 0.0, 1.0)

    def f(z):
        out = np.zeros_like(z)
        # exp(-1/z) is exactly 0.0 in double precision below z = 1e-3
        pos = z > 1e-3
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    a, b = f(1.0 - s), f(s)
    return a / (a + b)


def blend_weights(d):
    """Partition of unity (w_z, w_x) on the unit sphere of directions."""
    a = _smooth_cutoff(d[..., 2] ** 2)
    b = _smooth_cutoff(d[..., 0] ** 2)
    return a / (a + b), b / (a + b)


def _sphere_dirs(theta, phi, frame):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    z = np.zeros_like(theta)
    e = np.stack([st * cp, st * sp, ct], -1)
    et = np.stack([ct * cp, ct * sp, -st], -1)
    ep = np.stack([-st * sp, st * cp, z], -1)
    ett = -e
    etp = np.stack([-ct * sp, ct * cp, z], -1)
    epp = np.stack([-st * cp, -st * sp, z], -1)
    return tuple(a @ frame.T for a in (e, et, ep, ett, etp, epp))


class SphericalImageChart(SurfaceChart):
    """phi(theta, phi) = S(d(theta, phi)) for a map S of the unit sphere of directions.

    ``smap`` is an object with ``map(d)``, ``dmap(d, w)`` and
    ``d2map(d, w1, w2)`` (first/second directional derivatives).
    """

    def __init__(self, smap, axis, name):
        self.smap = smap
        self.axis = axis
        self.frame = _AXIS_FRAMES[axis]
        super().__init__(self._pt, self._first, self._second,
                         domain=((THETA_CUT, math.pi - THETA_CUT), (0.0, 2 * math.pi)),
                         periodic=(False, True), orientation=1, scale=1.0,
                         name=f"{name}[{axis}]")

    def direction(self, u, v):
        return _sphere_dirs(u, v, self.frame)[0]

    def _pt(self, u, v):
        return self.smap.map(_sphere_dirs(u, v, self.frame)[0])

    def _first(self, u, v):
        e, et, ep, *_ = _sphere_dirs(u, v, self.frame)
        return self.smap.dmap(e, et), self.smap.dmap(e, ep)

    def _second(self, u, v):
        e, et, ep, ett, etp, epp = _sphere_dirs(u, v, self.frame)
        S = self.smap
        return (S.dmap(e, ett) + S.d2map(e, et, et),
                S.dmap(e, etp) + S.d2map(e, et, ep),
                S.dmap(e, epp) + S.d2map(e, ep, ep))

    def weight(self, u, v):
        wz, wx = blend_weights(self.direction(u, v))
        return wz if self.axis == "z" else wx

    def params_of_direction(self, d):
        loc = np.asarray(d, dtype=float) @ self.frame
        theta = np.arccos(np.clip(loc[..., 2], -1, 1))
        phi = np.mod(np.arctan2(loc[..., 1], loc[..., 0]), 2 * np.pi)
        return theta, phi


class _LinearImage:
    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)

    def map(self, d):
        return d @ self.A.T

    def dmap(self, d, w):
        return w @ self.A.T

    def d2map(self, d, w1, w2):
        return np.zeros_like(w1)

    def direction_of(self, x):
        d = np.asarray(x, dtype=float) @ np.linalg.inv(self.A).T
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


class _RadialImage:
    """d -> r d / F(d): the Minkowski sphere of radius r."""

    def __init__(self, norm, r):
        self.norm = norm
        self.r = float(r)

    def map(self, d):
        return self.r * d / self.norm.value(d)[..., None]

    def dmap(self, d, w):
        F = self.norm.value(d)[..., None]
        gw = np.sum(self.norm.grad(d) * w, -1, keepdims=True)
        return self.r * (w / F - d * gw / F**2)

    def d2map(self, d, w1, w2):
        F = self.norm.value(d)[..., None]
        g = self.norm.grad(d)
        H = self.norm.hess(d)
        g1 = np.sum(g * w1, -1, keepdims=True)
        g2 = np.sum(g * w2, -1, keepdims=True)
        hww = np.einsum("...i,...ij,...j->...", w1, H, w2)[..., None]
        return self.r * (-w1 * g2 / F**2 - w2 * g1 / F**2 - d * hww / F**2
                         + 2 * d * g1 * g2 / F**3)

    def direction_of(self, x):
        x = np.asarray(x, dtype=float)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)


# ----------------------------------------------------------------------------
# atlases


@dataclass
class SurfaceAtlas:
    """Charts covering a surface, with partition-of-unity weights per chart."""

    charts: list
    name: str
    params: dict = field(default_factory=dict)
    closed: bool = True
    contains_fn: object = None
    volume: float | None = None
    bbox: tuple | None = None
    locate_fn: object = None

    def contains(self, z):
        if self.contains_fn is None:
            raise NotImplementedError(f"{self.name} has no inside test")
        return self.contains_fn(np.asarray(z, dtype=float))

    def locate(self, x):
        """(chart index, u, v) of a surface point, picking the chart with most weight."""
        if self.locate_fn is None:
            raise NotImplementedError(f"{self.name} cannot invert its parametrisation")
        return self.locate_fn(np.asarray(x, dtype=float))

    def scaled(self, c):
        c = float(c)
        contains = None
        if self.contains_fn is not None:
            contains = lambda z: self.contains_fn(z / c)  # noqa: E731
        locate = None
        if self.locate_fn is not None:
            locate = lambda x: self.locate_fn(x / c)  # noqa: E731
        bbox = None
        if self.bbox is not None:
            bbox = (c * np.asarray(self.bbox[0]), c * np.asarray(self.bbox[1]))
        return SurfaceAtlas([ch.scaled(c) for ch in self.charts], f"{c}*{self.name}",
                            {**self.params, "homothety": c}, self.closed, contains,
                            None if self.volume is None else self.volume * c**3, bbox, locate)

    def describe(self):
        return {"kind": self.name, **self.params}


def _spherical_atlas(smap, name, params, contains, volume, bbox):
    charts = [SphericalImageChart(smap, "z", name), SphericalImageChart(smap, "x", name)]

    def locate(x):
        d = smap.direction_of(x)
        wz, wx = blend_weights(d)
        k = 0 if wz >= wx else 1
        u, v = charts[k].params_of_direction(d)
        return k, float(u), float(v)

    return SurfaceAtlas(charts, name, params, True, contains, volume, bbox, locate)


def ellipsoid(a, b, c):
    if min(a, b, c) <= 0:
        raise InvalidInput("ellipsoid semi-axes must be positive")
    A = np.diag([a, b, c]).astype(float)
    ax = np.array([a, b, c], dtype=float)
    return _spherical_atlas(_LinearImage(A), "ellipsoid", {"a": a, "b": b, "c": c},
                            lambda z: np.sum((z / ax) ** 2, -1) <= 1.0,
                            4 * math.pi * a * b * c / 3, (-ax, ax))


def round_sphere(radius=1.0):
    atlas = ellipsoid(radius, radius, radius)
    atlas.name = "sphere"
    atlas.params = {"radius": radius}
    return atlas


def minkowski_sphere(norm, r=1.0):
    """The sphere r * dB of ``norm``, parametrised radially over directions."""
    from .norms import cone_volume

    ext = r * norm.r_max * np.ones(3)
    return _spherical_atlas(_RadialImage(norm, r), "minkowski_sphere", {"r": r},
                            lambda z: norm.value(z) <= r, r**3 * cone_volume(norm),
                            (-ext, ext))


def torus_chart(R, r):
    """Torus with u = tube angle (0 on the outer equator), v = azimuth."""

    def pt(u, v):
        w = R + r * np.cos(u)
        return np.stack([w * np.cos(v), w * np.sin(v), r * np.sin(u)], -1)

    def first(u, v):
        w = R + r * np.cos(u)
        zero = np.zeros_like(u)
        pu = np.stack([-r * np.sin(u) * np.cos(v), -r * np.sin(u) * np.sin(v), r * np.cos(u)], -1)
        pv = np.stack([-w * np.sin(v), w * np.cos(v), zero], -1)
        return pu, pv

    def second(u, v):
        w = R + r * np.cos(u)
        zero = np.zeros_like(u)
        puu = np.stack([-r * np.cos(u) * np.cos(v), -r * np.cos(u) * np.sin(v), -r * np.sin(u)], -1)
        puv = np.stack([r * np.sin(u) * np.sin(v), -r * np.sin(u) * np.cos(v), zero], -1)
        pvv = np.stack([-w * np.cos(v), -w * np.sin(v), zero], -1)
        return puu, puv, pvv

    # phi_u x phi_v points inward for this ordering
    return SurfaceChart(pt, first, second, domain=((0.0, 2 * math.pi), (0.0, 2 * math.pi)),
                        periodic=(True, True), orientation=-1, scale=1.0, name="torus")


def torus(R, r):
    if not 0 < r < R:
        raise InvalidInput("torus needs 0 < r < R")
    chart = torus_chart(R, r)

    def contains(z):
        rho = np.hypot(z[..., 0], z[..., 1])
        return (rho - R) ** 2 + z[..., 2] ** 2 <= r * r

    def locate(x):
        rho = math.hypot(x[0], x[1])
        return 0, math.atan2(x[2], rho - R) % (2 * math.pi), math.atan2(x[1], x[0]) % (2 * math.pi)

    ext = np.array([R + r, R + r, r])
    return SurfaceAtlas([chart], "torus", {"R": R, "r": r}, True, contains,
                        2 * math.pi**2 * R * r * r, (-ext, ext), locate)


def plane_chart(extent=1.0):
    def pt(u, v):
        return np.stack([u, v, np.zeros_like(u)], -1)

    def first(u, v):
        one, zero = np.ones_like(u), np.zeros_like(u)
        return np.stack([one, zero, zero], -1), np.stack([zero, one, zero], -1)

    def second(u, v):
        z = np.zeros(u.shape + (3,))
        return z, z.copy(), z.copy()

    return SurfaceChart(pt, first, second, domain=((-extent, extent), (-extent, extent)),
                        scale=1.0, name="plane")


def graph_chart(f, extent=1.0, name="graph"):
    """Graph z = f(x, y) over [-extent, extent]^2, derivatives by finite differences."""

    def pt(u, v):
        return np.stack([u, v, np.broadcast_to(f(u, v), u.shape).astype(float)], -1)

    return SurfaceChart(pt, domain=((-extent, extent), (-extent, extent)), scale=1.0, name=name)


def graph(expr, extent=1.0):
    f = parse_expression(expr)
    chart = graph_chart(f, extent, name=f"graph({expr})")
    return SurfaceAtlas([chart], "graph", {"expr": expr}, closed=False,
                        locate_fn=lambda x: (0, float(x[0]), float(x[1])))


# ----------------------------------------------------------------------------
# expression parsing for graph surfaces

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}
_VARS = {"x": 0, "y": 1, "u": 0, "v": 1}


def parse_expression(expr):
    """Compile an arithmetic expression in x, y into a vectorised callable.

    Supports + - * / ^ (or **), unary minus, numeric literals, ``pi`` and the
    functions sin, cos, exp.  Anything else raises ``InvalidInput``.
    """
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise InvalidInput(f"cannot parse expression {expr!r}: {exc.msg}") from None

    def ev(node, x, y):
        if isinstance(node, ast.Expression):
            return ev(node.body, x, y)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left, x, y), ev(node.right, x, y))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = ev(node.operand, x, y)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in _VARS:
                return (x, y)[_VARS[node.id]]
            if node.id == "pi":
                return math.pi
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0], x, y))
        raise InvalidInput(f"unsupported construct in expression {expr!r}")

    # validate once on scalars so errors surface at parse time
    ev(tree, 0.3, 0.7)
    return lambda x, y: ev(tree, np.asarray(x, dtype=float), np.asarray(y, dtype=float))
