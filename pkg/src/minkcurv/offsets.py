"""Parallel surfaces, tube volumes, the Steiner polynomial and a Monte Carlo volume oracle."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .birkhoff import FD_STEP, birkhoff_normal, eta_derivatives
from .errors import SingularOffset, UnsafeOffset
from .measures import QuadratureGrid, sample_surface
from .surfaces import SurfaceAtlas, SurfaceChart

MC_CHUNK = 1 << 18
DEFAULT_MC_SAMPLES = 10_000_000


# ----------------------------------------------------------------------------
# parallel surfaces


def parallel_curvature_predicted(K, H, c):
    """Gauss curvature of the parallel surface p + c eta(p): K / (c^2 K + 2 c H + 1)."""
    den = c * c * K + 2 * c * H + 1.0
    if np.any(np.abs(den) < 1e-12):
        raise SingularOffset("offset reaches a focal point (c^2 K + 2cH + 1 = 0)")
    return K / den


class ParallelChart(SurfaceChart):
    """psi(u, v) = phi(u, v) + c eta(u, v); psi_u = phi_u + c eta_u with eta_u by central differences."""

    def __init__(self, base, norm, c, h=None):
        self.base = base
        self.norm = norm
        self.c = float(c)
        self.h = FD_STEP * base.scale if h is None else h
        super().__init__(self._pt, self._first, None, base.domain, base.periodic,
                         base.orientation, base.scale, name=f"parallel({base.name}, {c})")

    def _pt(self, u, v):
        return self.base.point(u, v) + self.c * birkhoff_normal(self.base, self.norm, u, v)

    def _first(self, u, v):
        pu, pv = self.base.d1(u, v)
        eu, ev = eta_derivatives(self.base, self.norm, u, v, self.h)
        return pu + self.c * eu, pv + self.c * ev

    def weight(self, u, v):
        return self.base.weight(u, v)


@dataclass
class ParallelSurface:
    base: SurfaceAtlas
    norm: object
    c: float

    def chart(self, index=0):
        return ParallelChart(self.base.charts[index], self.norm, self.c)

    def atlas(self):
        return SurfaceAtlas([ParallelChart(ch, self.norm, self.c) for ch in self.base.charts],
                            f"parallel({self.base.name})", {"c": self.c}, self.base.closed)


# ----------------------------------------------------------------------------
# tube formula and Steiner polynomial


def max_safe_offset(surface, norm, grid=None, sampling=None):
    """1 / max principal curvature over the grid; +inf when no curvature is positive."""
    s = sampling if sampling is not None else sample_surface(surface, norm, grid)
    top = float(np.max(s.lambda1))
    return math.inf if top <= 0 else 1.0 / top


def tube_volume_weyl(surface, norm, eps, grid=None, sampling=None, check=True):
    """2 eps lambda_M + (2 eps^3 / 3) int K omega (the eps^2 term cancels)."""
    s = sampling if sampling is not None else sample_surface(surface, norm, grid)
    if check and eps >= max_safe_offset(surface, norm, sampling=s):
        raise UnsafeOffset(f"eps={eps} exceeds the safe offset {max_safe_offset(surface, norm, sampling=s):.4g}")
    return 2 * eps * s.integrate(1.0) + 2 * eps**3 / 3 * s.integrate(s.K)


@dataclass(frozen=True)
class SteinerPolynomial:
    """V(rho) = c0 + c1 rho + c2 rho^2 + c3 rho^3 for the outer parallel body M + rho B."""

    c0: float
    c1: float
    c2: float
    c3: float

    def __call__(self, rho):
        return self.c0 + rho * (self.c1 + rho * (self.c2 + rho * self.c3))

    def as_tuple(self):
        return (self.c0, self.c1, self.c2, self.c3)


def steiner_polynomial(surface, norm, grid=None, sampling=None):
    """Coefficients (volume, Minkowski area, int H omega, int K omega / 3)."""
    s = sampling if sampling is not None else sample_surface(surface, norm, grid)
    return SteinerPolynomial(s.integrate(s.rho) / 3.0, s.integrate(1.0), s.integrate(s.H),
                             s.integrate(s.K) / 3.0)


# ----------------------------------------------------------------------------
# Monte Carlo oracle


@dataclass
class MonteCarloVolume:
    estimate: float
    std_error: float
    n_samples: int
    box_volume: float
    hits: int
    inner: float | None = None     # part of the estimate inside the enclosed region
    outer: float | None = None

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("estimate", "std_error", "n_samples", "box_volume", "hits", "inner", "outer")}


class NormDistance:
    """dist_N(z, M) = min over M of F(z - p), by a point cloud plus Newton polish.

    The cloud gives an upper bound F(z - p_c) and a lower bound from the
    Euclidean distance; only samples whose bounds straddle a threshold are
    polished by damped Newton iterations in the chart parameters.
    """

    def __init__(self, surface, norm, spacing=0.02, k=8):
        self.surface = surface
        self.norm = norm
        self.k = k
        pts, ids, us, vs, gaps = [], [], [], [], []
        for i, chart in enumerate(surface.charts):
            (u0, u1), (v0, v1) = chart.domain
            cu, cv = np.meshgrid(np.linspace(u0, u1, 16), np.linspace(v0, v1, 16), indexing="ij")
            pu, pv = chart.d1(cu, cv)
            nu = max(8, int(math.ceil((u1 - u0) * np.max(np.linalg.norm(pu, axis=-1)) / spacing)))
            nv = max(8, int(math.ceil((v1 - v0) * np.max(np.linalg.norm(pv, axis=-1)) / spacing)))
            uu = np.linspace(u0, u1, nu, endpoint=not chart.periodic[0])
            vv = np.linspace(v0, v1, nv, endpoint=not chart.periodic[1])
            U, V = np.meshgrid(uu, vv, indexing="ij")
            P = chart.point(U, V)
            # largest half-diagonal of a grid cell bounds the distance to the nearest cloud point
            d1 = np.linalg.norm((np.roll(P, -1, 0) - P)[: None if chart.periodic[0] else -1], axis=-1)
            d2 = np.linalg.norm((np.roll(P, -1, 1) - P)[:, : None if chart.periodic[1] else -1], axis=-1)
            gaps.append(0.5 * math.sqrt(np.max(d1) ** 2 + np.max(d2) ** 2))
            pts.append(P.reshape(-1, 3))
            ids.append(np.full(U.size, i))
            us.append(U.ravel())
            vs.append(V.ravel())
        self.points = np.concatenate(pts)
        self.chart_id = np.concatenate(ids)
        self.u = np.concatenate(us)
        self.v = np.concatenate(vs)
        self.gap = 1.1 * max(gaps)
        self.tree = cKDTree(self.points)
        self._voxels = {}

    def bounds(self, z, cap):
        """(lower, upper, best cloud index) for dist_N; far samples get (inf, inf, -1)."""
        reach = cap * self.norm.r_max + self.gap
        n = len(z)
        lower = np.full(n, np.inf)
        upper = np.full(n, np.inf)
        best = np.full(n, -1)
        maybe = np.flatnonzero(self._voxel_filter(z, reach))
        d, idx = self.tree.query(z[maybe], k=self.k, distance_upper_bound=reach)
        hit = np.isfinite(d[:, 0])
        near = maybe[hit]
        if len(near):
            zi, di, ii = z[near], d[hit], idx[hit]
            valid = np.isfinite(di)
            safe = np.where(valid, ii, 0)
            F = self.norm.value(zi[:, None, :] - self.points[safe])
            F = np.where(valid, F, np.inf)
            j = np.argmin(F, axis=1)
            upper[near] = F[np.arange(len(zi)), j]
            best[near] = safe[np.arange(len(zi)), j]
            lower[near] = np.maximum(di[:, 0] - self.gap, 0.0) / self.norm.r_max
        return lower, upper, best

    def _voxel_filter(self, z, reach):
        # voxels of side ``reach`` touched by the cloud, dilated by one cell:
        # any point within ``reach`` of the cloud lies in a marked voxel
        key = round(reach, 12)
        if key not in self._voxels:
            lo = self.points.min(0) - 2 * reach
            cells = np.floor((self.points - lo) / reach).astype(np.int64)
            shape = cells.max(0) + 3
            occ = np.zeros(shape, bool)
            occ[tuple(cells.T)] = True
            dil = np.zeros_like(occ)
            for off in np.ndindex(3, 3, 3):
                sl_dst = tuple(slice(max(o - 1, 0), s + min(o - 1, 0)) for o, s in zip(off, shape))
                sl_src = tuple(slice(max(1 - o, 0), s + min(1 - o, 0)) for o, s in zip(off, shape))
                dil[sl_dst] |= occ[sl_src]
            self._voxels[key] = (lo, dil)
        lo, dil = self._voxels[key]
        c = np.floor((z - lo) / reach).astype(np.int64)
        inside = np.all((c >= 0) & (c < np.array(dil.shape)), axis=1)
        out = np.zeros(len(z), bool)
        out[inside] = dil[tuple(c[inside].T)]
        return out

    def polish(self, z, start, iters=25):
        """Minimise F(z - phi(u, v)) from cloud index ``start``; returns the minimum value."""
        out = np.empty(len(z))
        for ci, chart in enumerate(self.surface.charts):
            sel = self.chart_id[start] == ci
            if not np.any(sel):
                continue
            out[sel] = _newton_min(chart, self.norm, z[sel], self.u[start[sel]], self.v[start[sel]], iters)
        return out

    def distances(self, z, cap):
        """dist_N(z, M) for samples with dist <= cap (exact up to Newton tolerance), inf beyond."""
        lower, upper, best = self.bounds(z, cap)
        dist = np.full(len(z), np.inf)
        cand = lower <= cap
        if np.any(cand):
            dist[cand] = np.minimum(upper[cand], self.polish(z[cand], best[cand]))
        return dist

    def within(self, z, thresholds):
        """Boolean matrix (len(thresholds), len(z)): dist_N(z, M) <= threshold."""
        thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
        lower, upper, best = self.bounds(z, thresholds.max())
        sure_in = upper[None, :] <= thresholds[:, None]
        sure_out = lower[None, :] > thresholds[:, None]
        todo = np.any(~sure_in & ~sure_out, axis=0)
        res = sure_in.copy()
        if np.any(todo):
            d = np.minimum(upper[todo], self.polish(z[todo], best[todo]))
            res[:, todo] = d[None, :] <= thresholds[:, None]
        return res


def _newton_min(chart, norm, z, u, v, iters):
    def f(u, v):
        return norm.value(z - chart.point(u, v))

    fu = f(u, v)
    for _ in range(iters):
        p = chart.point(u, v)
        pu, pv = chart.d1(u, v)
        puu, puv, pvv = chart.d2(u, v)
        w = z - p
        g = norm.grad(w)
        Hf = norm.hess(w)
        J = np.stack([pu, pv], -1)
        grad = -np.einsum("nij,ni->nj", J, g)
        Hs = np.einsum("nia,nij,njb->nab", J, Hf, J)
        Hs[:, 0, 0] -= np.sum(g * puu, -1)
        Hs[:, 0, 1] -= np.sum(g * puv, -1)
        Hs[:, 1, 0] -= np.sum(g * puv, -1)
        Hs[:, 1, 1] -= np.sum(g * pvv, -1)
        det = Hs[:, 0, 0] * Hs[:, 1, 1] - Hs[:, 0, 1] ** 2
        pd = (det > 0) & (Hs[:, 0, 0] > 0)
        step = np.empty_like(grad)
        if np.any(pd):
            step[pd] = -np.linalg.solve(Hs[pd], grad[pd][:, :, None])[..., 0]
        if np.any(~pd):
            gn = np.linalg.norm(grad[~pd], axis=-1, keepdims=True)
            step[~pd] = -0.05 * grad[~pd] / np.maximum(gn, 1e-300)
        t = np.ones(len(u))
        done = np.zeros(len(u), bool)
        nu, nv, nf = u.copy(), v.copy(), fu.copy()
        for _halve in range(12):
            cu = u + t * step[:, 0]
            cv = v + t * step[:, 1]
            cf = f(cu, cv)
            ok = (cf < fu) & ~done
            nu[ok], nv[ok], nf[ok] = cu[ok], cv[ok], cf[ok]
            done |= ok
            if np.all(done):
                break
            t = np.where(done, t, 0.5 * t)
        improved = fu - nf
        u, v, fu = nu, nv, nf
        if np.all(improved <= 1e-15 * np.maximum(fu, 1e-300)):
            break
    return fu


def _chunk_rng(seed, index):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def _mc_box(surface, norm, pad):
    lo, hi = (np.asarray(b, dtype=float) for b in surface.bbox)
    return lo - pad * norm.r_max, hi + pad * norm.r_max


def monte_carlo_counts(surface, norm, thresholds, n_samples, seed, include_inside=False,
                       threads=1, spacing=0.02):
    """Hit counts of dist_N(z, M) <= t for each threshold t, on one shared sample.

    Samples are drawn chunk by chunk from streams keyed by (seed, chunk index),
    so the counts do not depend on ``threads``.  With ``include_inside`` the
    region enclosed by M is counted as well (outer parallel bodies).  Returns
    (counts, inside-hit counts, box volume).
    """
    thresholds = np.atleast_1d(np.asarray(thresholds, dtype=float))
    lo, hi = _mc_box(surface, norm, thresholds.max())
    box_volume = float(np.prod(hi - lo))
    oracle = NormDistance(surface, norm, spacing=spacing)
    n_chunks = -(-int(n_samples) // MC_CHUNK)

    def run(ci):
        m = min(MC_CHUNK, int(n_samples) - ci * MC_CHUNK)
        z = lo + (hi - lo) * _chunk_rng(seed, ci).random((m, 3))
        inside = surface.contains(z) if surface.contains_fn is not None else np.zeros(m, bool)
        if include_inside:
            # enclosed samples are hits whatever their distance
            hit = np.ones((len(thresholds), m), bool)
            hit[:, ~inside] = oracle.within(z[~inside], thresholds)
        else:
            hit = oracle.within(z, thresholds)
        return hit.sum(axis=1), (hit & inside[None, :]).sum(axis=1)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(run, range(n_chunks)))
    else:
        parts = [run(ci) for ci in range(n_chunks)]
    counts = np.sum([p[0] for p in parts], axis=0)
    inner = np.sum([p[1] for p in parts], axis=0)
    return counts, inner, box_volume


def _volume(count, n, box):
    frac = count / n
    return frac * box, box * math.sqrt(frac * (1 - frac) / n)


def tube_volume_monte_carlo(surface, norm, eps, n_samples=DEFAULT_MC_SAMPLES, seed=0, threads=1):
    """Volume of {z : dist_N(z, M) <= eps} by uniform sampling of an inflated bounding box."""
    counts, inner, box = monte_carlo_counts(surface, norm, [eps], n_samples, seed, threads=threads)
    est, se = _volume(int(counts[0]), n_samples, box)
    inside = outside = None
    if surface.contains_fn is not None:
        inside = int(inner[0]) / n_samples * box
        outside = est - inside
    return MonteCarloVolume(est, se, int(n_samples), box, int(counts[0]), inside, outside)


def parallel_body_monte_carlo(surface, norm, rhos, n_samples=1_000_000, seed=0, threads=1):
    """Volumes of M + rho B for each rho (enclosed region plus outer tube), common samples."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    counts, _, box = monte_carlo_counts(surface, norm, rhos, n_samples, seed,
                                        include_inside=True, threads=threads)
    out = []
    for c in counts:
        est, se = _volume(int(c), n_samples, box)
        out.append(MonteCarloVolume(est, se, int(n_samples), box, int(c)))
    return out


def steiner_slope_from_mc(volume0, rhos, volumes):
    """First Steiner coefficient from MC volumes: least-squares quadratic in rho through V(0)."""
    rhos = np.asarray(rhos, dtype=float)
    y = (np.asarray(volumes, dtype=float) - volume0) / rhos
    A = np.stack([np.ones_like(rhos), rhos], -1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def default_grid(surface):
    return QuadratureGrid.for_atlas(surface)
