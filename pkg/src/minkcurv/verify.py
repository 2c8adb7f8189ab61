"""Check matrix over (surface, norm) pairs with a deterministic JSON report."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import birkhoff, geodesics, measures, offsets, plane2d
from .config import NormConfig, SurfaceConfig, VerifyConfig
from .errors import GeometryError
from .norms import sphere_area
from .surfaces import minkowski_sphere


@dataclass
class VerificationReport:
    theorem: str
    surface: str
    norm: str
    lhs: float
    rhs: object
    tolerance: float
    passed: bool
    oracle: str
    wall_time: float = 0.0
    error: str | None = None

    def stable_dict(self):
        d = asdict(self)
        d.pop("wall_time")
        return d


def _label(cfg):
    d = cfg.as_dict()
    kind = d.pop("kind")
    args = ",".join(f"{k}={_fmt(v)}" for k, v in d.items())
    return f"{kind}({args})"


def _fmt(v):
    return repr(v) if isinstance(v, str) else f"{float(v):g}"


def _f(x):
    return float(x)


class _Pair:
    """Checks for one (surface, norm) pair, sharing one quadrature sampling."""

    def __init__(self, scfg, ncfg, lam_dB, grid_level, seed, mc_samples, extras):
        self.scfg, self.ncfg = scfg, ncfg
        self.sl, self.nl = _label(scfg), _label(ncfg)
        self.norm = ncfg.build()
        self.surface = scfg.build(self.norm)
        self.lam = lam_dB
        self.level = grid_level
        self.seed = seed
        self.mc_samples = mc_samples
        self.extras = extras
        self.out = []

    def add(self, theorem, lhs, rhs, tol, passed, oracle, t0):
        self.out.append(VerificationReport(theorem, self.sl, self.nl, _f(lhs), rhs, tol, bool(passed),
                                           oracle, time.perf_counter() - t0))

    def guarded(self, theorem, fn):
        t0 = time.perf_counter()
        try:
            fn(t0)
        except GeometryError as exc:
            self.out.append(VerificationReport(theorem, self.sl, self.nl, math.nan, None, 0.0, False,
                                               "exception", time.perf_counter() - t0,
                                               f"{type(exc).__name__}: {exc}"))

    def run(self):
        grid = measures.QuadratureGrid.for_atlas(self.surface, level=self.level)
        t0 = time.perf_counter()
        s = measures.sample_surface(self.surface, self.norm, grid)
        self.s = s
        lam_M = s.integrate(1.0)
        if self.scfg.closed:
            chi = 0.0 if self.scfg.kind == "torus" else 2.0
            target = self.lam * chi / 2
            intK = s.integrate(s.K)
            self.add("total_curvature", intK, target, 1e-4, abs(intK - target) <= 1e-4 * self.lam,
                     "unit sphere area times half the Euler characteristic", t0)
            W = s.integrate(s.H**2)
            self.add("willmore", W, self.lam, 1e-6, W >= self.lam - 1e-6, "unit sphere area", t0)
            vol = s.integrate(s.rho) / 3
            ref = self.surface.volume
            self.add("flux_volume", vol, ref, 1e-5, abs(vol - ref) <= 1e-5 * ref,
                     "closed-form enclosed volume", t0)
            res = s.integrate(1.0 - s.rho * s.H)
            self.add("alexandrov_identity", res, 0.0, 1e-5, abs(res) <= 1e-5 * lam_M,
                     "identity, tolerance relative to the Minkowski area", t0)
            if self.scfg.convex and np.min(s.H) > 0:
                inv = s.integrate(1.0 / s.H)
                self.add("volume_estimate", inv, 3 * vol, 1e-6, inv >= 3 * vol - 1e-6,
                         "three times the flux volume", t0)
        lo, val, hi = measures.huber_bounds(self.surface, self.norm, sampling=s)
        self.add("huber_bounds", val, [_f(lo), _f(hi)], 0.0, lo <= val <= hi,
                 "bounds from support and curvature extrema of the unit sphere", t0)
        ratio = s.K_M / s.K_dB
        scale = max(float(np.max(np.abs(ratio))), 1e-300)
        err = float(np.max(np.abs(s.K - ratio))) / scale
        self.add("curvature_ratio", err, 0.0, 1e-5, err <= 1e-5,
                 "Euclidean curvature of the surface over that of the unit sphere", t0)
        for name in self.extras:
            self.guarded(name, getattr(self, "_" + name))
        return self.out

    # optional, more expensive checks ---------------------------------------

    def _tube_formula(self, t0):
        if _shell_case(self.scfg, self.ncfg):
            # the tube of a round sphere is a spherical shell
            R = self.scfg.radius
            eps = 0.25 * R
            exact = 4 * math.pi / 3 * ((R + eps) ** 3 - (R - eps) ** 3)
            weyl = 2 * eps * 4 * math.pi * R * R + 2 * eps**3 / 3 * 4 * math.pi
            self.add("tube_shell_closed_form", weyl, exact, 1e-10, abs(weyl - exact) <= 1e-10 * exact,
                     "volume of the spherical shell", t0)
            computed = offsets.tube_volume_weyl(self.surface, self.norm, eps, sampling=self.s)
            self.add("tube_shell_quadrature", computed, exact, 1e-6, abs(computed - exact) <= 1e-6 * exact,
                     "volume of the spherical shell", t0)
            return
        eps = 0.5 * offsets.max_safe_offset(self.surface, self.norm, sampling=self.s)
        eps = float(f"{eps:.3g}")
        weyl = offsets.tube_volume_weyl(self.surface, self.norm, eps, sampling=self.s)
        mc = offsets.tube_volume_monte_carlo(self.surface, self.norm, eps, self.mc_samples, self.seed)
        self.add("tube_formula", weyl, [mc.estimate, mc.std_error], 3.0,
                 abs(weyl - mc.estimate) <= 3 * mc.std_error, f"Monte Carlo, {mc.n_samples} samples", t0)

    def _steiner(self, t0):
        poly = offsets.steiner_polynomial(self.surface, self.norm, sampling=self.s)
        rhos = [0.05, 0.1, 0.2]
        mcs = offsets.parallel_body_monte_carlo(self.surface, self.norm, rhos, self.mc_samples, self.seed)
        z = max(abs(poly(r) - m.estimate) / m.std_error for r, m in zip(rhos, mcs))
        self.add("steiner", z, [[m.estimate, m.std_error] for m in mcs], 3.0, z <= 3.0,
                 "Monte Carlo volume of the parallel bodies, max z-score", t0)

    def _homothety(self, t0):
        chart = self.surface.charts[0]
        u, v = _probe_points(chart, 6)
        c = 3.0
        K = birkhoff.curvature_sample(chart, self.norm, u, v).K
        Kc = birkhoff.curvature_sample(chart.scaled(c), self.norm, u, v).K
        err = float(np.max(np.abs(Kc * c * c - K) / np.maximum(np.abs(K), 1e-3)))
        self.add("homothety", err, 0.0, 1e-7, err <= 1e-7, "curvature of c M times c^2", t0)

    def _bdp(self, t0):
        chart = self.surface.charts[0]
        u, v = _probe_points(chart, 1)
        r = geodesics.bdp_estimate(chart, self.norm, float(u[0]), float(v[0]))
        err = abs(r.K_circumference - r.K_direct) / abs(r.K_direct)
        self.add("bdp_limit", r.K_circumference, r.K_direct, 1e-2,
                 err <= 1e-2 and 2.9 <= r.slope <= 3.1, "determinant of the shape matrix", t0)


def _shell_case(scfg, ncfg):
    return scfg.kind == "sphere" and ncfg.kind == "euclidean" and ncfg.radius == 1.0


def _probe_points(chart, n):
    (u0, u1), (v0, v1) = chart.domain
    t = (np.arange(n) + 0.5) / n
    return u0 + (u1 - u0) * (0.3 + 0.4 * t), v0 + (v1 - v0) * (0.15 + 0.7 * t[::-1])


def _norm_checks(ncfg, lam):
    """Checks depending on the norm alone: unit-sphere fixed point and the planar suite."""
    out = []
    nl = _label(ncfg)
    norm = ncfg.build()
    t0 = time.perf_counter()
    atlas = minkowski_sphere(norm, 1.0)
    worst = 0.0
    for chart in atlas.charts:
        u, v = _probe_points(chart, 10)
        U, V = np.meshgrid(u, v, indexing="ij")
        cs = birkhoff.curvature_sample(chart, norm, U, V)
        worst = max(worst, float(np.max(np.abs(cs.K - 1))), float(np.max(np.abs(cs.H - 1))))
    out.append(VerificationReport("sphere_fixed_point", "unit_sphere", nl, worst, 0.0, 1e-7, worst <= 1e-7,
                                  "K = H = 1 on the unit sphere", time.perf_counter() - t0))
    if ncfg.kind != "superellipsoid":
        t0 = time.perf_counter()
        pn = ncfg.build(dim=2)
        rep = plane2d.plane_report(plane2d.ellipse(2, 1), pn)
        out.append(VerificationReport("circular_total_curvature", "ellipse(a=2,b=1)", nl,
                                      rep["total_circular_curvature"], rep["unit_circle_length"], 1e-5,
                                      rep["total_curvature_error"] <= 1e-5, "Minkowski length of the unit circle",
                                      time.perf_counter() - t0))
        lhs, rhs = plane2d.area_curvature_bound(plane2d.norm_circle(pn, 1.5), pn)
        out.append(VerificationReport("plane_area_bound", "1.5*S", nl, lhs, rhs, 1e-5,
                                      abs(lhs - rhs) <= 1e-5 * rhs, "equality on circles of the norm",
                                      time.perf_counter() - t0))
    return out


def run_verification(cfg: VerifyConfig, seed=0, threads=1, grid_level=1):
    """Run the check matrix; returns (report dict, all passed)."""
    wall0 = time.perf_counter()
    norm_cfgs = list(cfg.norms)
    lam = [sphere_area(n.build()) for n in norm_cfgs]
    tasks = []
    for i, scfg in enumerate(cfg.surfaces):
        for j, ncfg in enumerate(norm_cfgs):
            idx = i * len(norm_cfgs) + j
            extras = _extras(cfg.profile, scfg, ncfg, i, j, len(cfg.surfaces), len(norm_cfgs))
            pair_seed = int(np.random.SeedSequence([seed, idx]).generate_state(1)[0])
            tasks.append(_Pair(scfg, ncfg, lam[j], grid_level, pair_seed, cfg.mc_samples, extras))

    def run_norm(j):
        return _norm_checks(norm_cfgs[j], lam[j])

    with ThreadPoolExecutor(max(1, threads)) as ex:
        pair_results = list(ex.map(_safe_run, tasks))
        norm_results = list(ex.map(run_norm, range(len(norm_cfgs))))
    checks = [c for group in norm_results for c in group] + [c for group in pair_results for c in group]
    passed = all(c.passed for c in checks)
    report = {
        "seed": int(seed),
        "profile": cfg.profile,
        "grid_level": int(grid_level),
        "norms": [n.as_dict() for n in norm_cfgs],
        "unit_sphere_areas": [float(x) for x in lam],
        "surfaces": [s.as_dict() for s in cfg.surfaces],
        "checks": [c.stable_dict() for c in checks],
        "summary": {"total": len(checks), "passed": sum(c.passed for c in checks),
                    "failed": sum(not c.passed for c in checks), "all_passed": passed},
        "timing": {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "total_seconds": time.perf_counter() - wall0,
            "checks": [c.wall_time for c in checks],
        },
    }
    return report, passed


def _safe_run(pair):
    try:
        return pair.run()
    except GeometryError as exc:
        return [VerificationReport("sampling", pair.sl, pair.nl, math.nan, None, 0.0, False, "exception",
                                   0.0, f"{type(exc).__name__}: {exc}")]


def _extras(profile, scfg, ncfg, i, j, n_s, n_n):
    if profile == "full":
        extras = ["homothety", "bdp"]
        if scfg.closed:
            extras.append("tube_formula")
        if scfg.convex:
            extras.append("steiner")
        return extras
    # quick profile: every check type appears once, on the last norm of the matrix
    extras = ["tube_formula"] if _shell_case(scfg, ncfg) else []
    if j == n_n - 1:
        extras.append("homothety")
        if scfg.kind in ("sphere", "torus") and "tube_formula" not in extras:
            extras.append("tube_formula")
        if scfg.kind == "ellipsoid":
            extras += ["bdp", "steiner"]
    return extras


def stable_report(report):
    """The report without its volatile ``timing`` block."""
    return {k: v for k, v in report.items() if k != "timing"}


def format_table(report):
    rows = [("check", "surface", "norm", "lhs", "rhs", "tol", "ok")]
    for c in report["checks"]:
        rhs = c["rhs"]
        rhs_s = ("[" + ", ".join(_short(x) for x in rhs) + "]") if isinstance(rhs, list) else _short(rhs)
        rows.append((c["theorem"], c["surface"], c["norm"], _short(c["lhs"]), rhs_s, f"{c['tolerance']:g}",
                     "PASS" if c["passed"] else "FAIL"))
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)) for r in rows]
    s = report["summary"]
    lines.append(f"\n{s['passed']}/{s['total']} checks passed")
    return "\n".join(lines)


def _short(x):
    if x is None:
        return "-"
    if isinstance(x, list):
        return "[" + ", ".join(_short(y) for y in x) + "]"
    return f"{x:.10g}"
