"""The planar area inequality across a family of l^p plane norms.

For each p, compares 2 area(D) with the integral of 1/k_c in anti-norm arc
length on an ellipse and on the unit circle of the norm (the equality case).
"""

import argparse

import numpy as np

from minkcurv import plane2d


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=2.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=0.2)
    args = ap.parse_args()

    curve = plane2d.ellipse(args.a, args.b)
    print(f"{'p':>5} {'l(S)':>10} {'int k_c':>10} {'2 area':>10} {'int 1/k_c':>10} {'gap':>9} {'circle gap':>11}")
    for p in np.arange(2.0, 8.01, 1.0):
        pn = plane2d.plane_lp(p, args.delta)
        lS = plane2d.unit_circle_length(pn)
        total = plane2d.total_circular_curvature(curve, pn)
        lhs, rhs = plane2d.area_curvature_bound(curve, pn)
        c_lhs, c_rhs = plane2d.area_curvature_bound(plane2d.norm_circle(pn), pn)
        print(f"{p:5.1f} {lS:10.6f} {total:10.6f} {lhs:10.6f} {rhs:10.6f} {rhs - lhs:9.2e} {c_rhs - c_lhs:11.1e}")


if __name__ == "__main__":
    main()
