"""Weyl tube volume against Monte Carlo over a range of offsets.

The polynomial is guaranteed only below the safe offset 1 / max lambda1.
On the thin torus the overlap just past it is a sliver around the focal set
of the tube circles, so the two columns keep agreeing for a while.

    python scripts/tube_sweep.py --p 3 --samples 1000000
"""

import argparse
import json

import numpy as np

from minkcurv import measures, norms, offsets, surfaces


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--R", type=float, default=2.0)
    ap.add_argument("--r", type=float, default=0.5)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--json", help="write rows to this file")
    args = ap.parse_args()

    norm = norms.lp(args.p)
    torus = surfaces.torus(args.R, args.r)
    s = measures.sample_surface(torus, norm)
    safe = offsets.max_safe_offset(torus, norm, sampling=s)
    print(f"safe offset {safe:.4f}")
    print(f"{'eps':>6} {'weyl':>10} {'mc':>10} {'sigma':>8} {'z':>7}")
    rows = []
    for eps in np.round(np.linspace(0.05, 1.6 * safe, 8), 3):
        weyl = offsets.tube_volume_weyl(torus, norm, eps, sampling=s, check=False)
        mc = offsets.tube_volume_monte_carlo(torus, norm, eps, args.samples, args.seed, args.threads)
        z = (weyl - mc.estimate) / mc.std_error
        flag = "" if eps < safe else "  (beyond safe offset)"
        print(f"{eps:6.3f} {weyl:10.5f} {mc.estimate:10.5f} {mc.std_error:8.5f} {z:+7.2f}{flag}")
        rows.append({"eps": float(eps), "weyl": weyl, "z": z, **mc.as_dict()})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"safe_offset": safe, "rows": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
