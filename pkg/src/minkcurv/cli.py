"""Command line interface.

Exit codes: 0 success (for ``verify``: every check passed), 1 computation
failure or failed check, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import birkhoff, geodesics, measures, offsets, plane2d
from .config import NormConfig, RunConfig, SurfaceConfig
from .errors import ConfigError, GeometryError
from .norms import cone_volume, level_set_curvature, sphere_area, support_points, _directions
from .verify import format_table, run_verification, stable_report

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _dump(obj):
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True)


class Output:
    def __init__(self, out_dir):
        self.dir = out_dir
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)

    def json(self, name, obj, echo=True):
        text = _dump(obj)
        if self.dir:
            with open(os.path.join(self.dir, name), "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
        if echo:
            print(text)

    def csv(self, name, header, rows):
        if not self.dir:
            return
        with open(os.path.join(self.dir, name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])

    def text(self, name, body):
        if self.dir:
            with open(os.path.join(self.dir, name), "w", encoding="utf-8") as fh:
                fh.write(body + "\n")


# ----------------------------------------------------------------------------
# commands


def cmd_norm_info(cfg, out):
    norm = cfg.norm.build()
    d = _directions(3, 20000)
    x = support_points(norm, d)
    k = level_set_curvature(norm, x)
    lam = sphere_area(norm)
    out.json("norm_info.json", {
        "norm": cfg.norm.as_dict(),
        "r_min": norm.r_min,
        "r_max": norm.r_max,
        "unit_sphere_area": lam,
        "ball_volume": cone_volume(norm),
        "unit_sphere_curvature_range": [float(k.min()), float(k.max())],
        "support_range": [float(np.min(np.sum(x * d, -1))), float(np.max(np.sum(x * d, -1)))],
    })
    return EXIT_OK


def _sample_params(chart, n):
    (u0, u1), (v0, v1) = chart.domain
    u = u0 + (u1 - u0) * (np.arange(n) + 0.5) / n
    v = v0 + (v1 - v0) * (np.arange(n) + 0.5) / n
    return np.meshgrid(u, v, indexing="ij")


def cmd_curvature(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    rows = []
    worst = 0.0
    for ci, chart in enumerate(surf.charts):
        if cfg.points:
            if ci != cfg.chart:
                continue
            U = np.array([p[0] for p in cfg.points])
            V = np.array([p[1] for p in cfg.points])
        else:
            U, V = _sample_params(chart, cfg.n_grid)
            U, V = U.ravel(), V.ravel()
        cs = birkhoff.curvature_sample(chart, norm, U, V)
        ratio = birkhoff.curvature_ratio(chart, norm, U, V)
        worst = max(worst, float(np.max(np.abs(cs.K - ratio))))
        for i in range(len(U)):
            rows.append((ci, U[i], V[i], cs.K[i], cs.H[i], cs.lambda1[i], cs.lambda2[i], ratio[i], cs.residual[i]))
    out.csv("curvature.csv", ("chart", "u", "v", "K", "H", "lambda1", "lambda2", "K_ratio", "residual"), rows)
    out.json("curvature_summary.json", {
        "surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(), "n_points": len(rows),
        "K_range": [min(r[3] for r in rows), max(r[3] for r in rows)],
        "H_range": [min(r[4] for r in rows), max(r[4] for r in rows)],
        "max_abs_K_minus_ratio": worst,
    })
    return EXIT_OK


def _grid(cfg, surf):
    return measures.QuadratureGrid.for_atlas(surf, level=cfg.grid)


def cmd_integrate(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    res = measures.integrate_all(surf, norm, _grid(cfg, surf))
    res = {"surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(), **res}
    if surf.volume is not None:
        res["closed_form_volume"] = surf.volume
    out.json("integrate.json", res)
    return EXIT_OK


def cmd_tube(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    s = measures.sample_surface(surf, norm, _grid(cfg, surf))
    safe = offsets.max_safe_offset(surf, norm, sampling=s)
    weyl = offsets.tube_volume_weyl(surf, norm, cfg.eps, sampling=s, check=False)
    mc = offsets.tube_volume_monte_carlo(surf, norm, cfg.eps, cfg.samples, cfg.seed, cfg.threads)
    out.json("tube.json", {
        "surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(), "eps": cfg.eps,
        "safe_offset": safe, "within_safe_offset": cfg.eps < safe,
        "weyl": weyl, "monte_carlo": mc.as_dict(),
        "z_score": (weyl - mc.estimate) / mc.std_error if mc.std_error > 0 else math.nan,
    })
    return EXIT_OK


def cmd_steiner(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    s = measures.sample_surface(surf, norm, _grid(cfg, surf))
    poly = offsets.steiner_polynomial(surf, norm, sampling=s)
    mcs = offsets.parallel_body_monte_carlo(surf, norm, cfg.rhos, cfg.samples, cfg.seed, cfg.threads)
    out.json("steiner.json", {
        "surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(),
        "coefficients": list(poly.as_tuple()),
        "volumes": [{"rho": r, "polynomial": poly(r), "monte_carlo": m.as_dict(),
                     "z_score": (poly(r) - m.estimate) / m.std_error} for r, m in zip(cfg.rhos, mcs)],
    })
    return EXIT_OK


def cmd_parallel(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    chart = surf.charts[cfg.chart]
    if cfg.points:
        U = np.array([p[0] for p in cfg.points])
        V = np.array([p[1] for p in cfg.points])
    else:
        U, V = (a.ravel() for a in _sample_params(chart, 4))
    base = birkhoff.curvature_sample(chart, norm, U, V)
    rows, worst = [], 0.0
    for c in cfg.offsets:
        pred = offsets.parallel_curvature_predicted(base.K, base.H, c)
        direct = birkhoff.curvature_sample(offsets.ParallelChart(chart, norm, c), norm, U, V).K
        err = np.abs(direct - pred) / np.maximum(np.abs(pred), 1e-12)
        worst = max(worst, float(np.max(err)))
        rows += [{"c": c, "u": float(U[i]), "v": float(V[i]), "predicted": float(pred[i]),
                  "direct": float(direct[i]), "rel_error": float(err[i])} for i in range(len(U))]
    out.json("parallel.json", {"surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(),
                               "max_rel_error": worst, "points": rows})
    return EXIT_OK


def cmd_bdp(cfg, out):
    norm = cfg.norm.build()
    surf = cfg.surface.build(norm)
    chart = surf.charts[cfg.chart]
    pts = cfg.points or [tuple(float(a) for a in p) for p in zip(*(x.ravel() for x in _sample_params(chart, 2)))]
    results = []
    for u, v in pts:
        r = geodesics.bdp_estimate(chart, norm, u, v, radii=cfg.radii)
        results.append({"u": u, "v": v, **r.as_dict()})
    out.json("bdp.json", {"surface": cfg.surface.as_dict(), "norm": cfg.norm.as_dict(), "points": results})
    return EXIT_OK


def cmd_plane2d(cfg, out):
    pn = cfg.norm.build(dim=2)
    curve = cfg.curve.build(pn)
    n = cfg.plane_samples
    prof = plane2d.curve_profile(curve, pn, n)
    out.csv("plane2d.csv", ("t", "s", "s_a", "k_c"),
            zip(prof.t, prof.s, prof.s_a, prof.k_c))
    rep = plane2d.plane_report(curve, pn, n)
    out.json("plane2d.json", {"norm": cfg.norm.as_dict(), "curve": cfg.curve.kind, **rep})
    return EXIT_OK


def cmd_verify(cfg, out):
    report, passed = run_verification(cfg.verify, seed=cfg.seed, threads=cfg.threads, grid_level=cfg.grid)
    table = format_table(report)
    print(table)
    out.json("report.json", report, echo=False)
    out.text("report.txt", table)
    if not out.dir:
        print(_dump(stable_report(report)))
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "norm-info": cmd_norm_info,
    "curvature": cmd_curvature,
    "integrate": cmd_integrate,
    "tube": cmd_tube,
    "steiner": cmd_steiner,
    "parallel": cmd_parallel,
    "bdp": cmd_bdp,
    "plane2d": cmd_plane2d,
    "verify": cmd_verify,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="directory for JSON/CSV outputs")
    common.add_argument("--seed", type=int, help="seed for Monte Carlo sampling")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--grid", type=int, help="quadrature refinement level")
    common.add_argument("--norm", help='inline norm spec, e.g. \'{"kind": "lp", "p": 4}\'')
    common.add_argument("--surface", help='inline surface spec, e.g. \'{"kind": "torus", "R": 2, "r": 0.5}\'')
    p = _Parser(prog="minkcurv", description="Minkowski curvature of surfaces in normed spaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def _resolve(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    over = {}
    for key, lo in (("seed", 0), ("threads", 1), ("grid", 0)):
        val = getattr(args, key)
        if val is not None:
            if val < lo:
                raise ConfigError(f"--{key} must be >= {lo}", key)
            over[key] = val
    for key, cls in (("norm", NormConfig), ("surface", SurfaceConfig)):
        raw = getattr(args, key)
        if raw is not None:
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--{key} is not valid JSON: {exc.msg}", key) from None
            over[key] = cls.from_dict(data, key)
    return cfg.with_overrides(**over)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, Output(args.out))
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
