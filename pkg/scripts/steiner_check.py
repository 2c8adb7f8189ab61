"""Steiner polynomial of an ellipsoid against Monte Carlo parallel-body volumes."""

import argparse

from minkcurv import measures, norms, offsets, surfaces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--axes", type=float, nargs=3, default=(1.0, 1.5, 2.0))
    ap.add_argument("--rhos", type=float, nargs="+", default=(0.05, 0.1, 0.2, 0.4))
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=int, default=1)
    args = ap.parse_args()

    norm = norms.lp(args.p)
    ell = surfaces.ellipsoid(*args.axes)
    poly = offsets.steiner_polynomial(ell, norm, measures.QuadratureGrid.for_atlas(ell, args.grid))
    print("coefficients:", ", ".join(f"{c:.8f}" for c in poly.as_tuple()))
    mcs = offsets.parallel_body_monte_carlo(ell, norm, args.rhos, args.samples, args.seed)
    for rho, mc in zip(args.rhos, mcs):
        z = (poly(rho) - mc.estimate) / mc.std_error
        print(f"rho={rho:5.3f}  polynomial {poly(rho):10.5f}  MC {mc.estimate:10.5f} +- {mc.std_error:.5f}  z={z:+.2f}")
    slope = offsets.steiner_slope_from_mc(poly.c0, args.rhos, [m.estimate for m in mcs])
    print(f"Minkowski area {poly.c1:.5f}; slope fitted to MC volumes {slope:.5f}")


if __name__ == "__main__":
    main()
