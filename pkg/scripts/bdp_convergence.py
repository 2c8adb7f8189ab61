"""Circumference and area deficits of small geodesic circles, and their ratio.

Prints the deficit on the surface and on the unit sphere at shrinking radii,
the ratio at each radius and its extrapolation, next to det(d eta).
"""

import argparse

import numpy as np

from minkcurv import geodesics, norms, surfaces


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--surface", choices=["ellipsoid", "torus"], default="ellipsoid")
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--v", type=float, default=0.6)
    ap.add_argument("--levels", type=int, default=5, help="number of halvings of the radius")
    args = ap.parse_args()

    atlas = surfaces.ellipsoid(1, 1.5, 2) if args.surface == "ellipsoid" else surfaces.torus(2, 0.5)
    chart = atlas.charts[0]
    norm = norms.lp(args.p)
    R = geodesics.local_curvature_radius(chart, args.u, args.v)
    radii = 0.16 * R / 2.0 ** np.arange(args.levels)
    res = geodesics.bdp_estimate(chart, norm, args.u, args.v, radii=radii)
    print(f"det(d eta) = {res.K_direct:.10f}")
    print(f"{'r':>10} {'deficit_M':>12} {'deficit_B':>12} {'ratio':>14} {'area ratio':>14}")
    for row in zip(res.radii, res.deficits_M, res.deficits_B, res.ratios_circumference, res.ratios_area):
        print("{:10.5f} {:12.4e} {:12.4e} {:14.10f} {:14.10f}".format(*row))
    print(f"extrapolated: circumference {res.K_circumference:.10f}, area {res.K_area:.10f}")
    print(f"log-log slope of the surface deficit: {res.slope:.4f}")


if __name__ == "__main__":
    main()
