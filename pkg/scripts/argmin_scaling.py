#!/usr/bin/env python3
"""Scaling table for the argmin estimator of a flat-bottomed convex mean.

For the model amplitude*(x-1/2)^r the minimizer error scaled by n^(1/(2r+1))
should have stable quantiles across sample sizes while the raw error
shrinks; this prints both, per n.
"""

import argparse

import numpy as np

from convexreg import local_error_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--n-grid", default="1000,4000,16000")
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    grid = tuple(int(v) for v in args.n_grid.split(","))
    study = local_error_study(args.r, grid, args.replicates, seed=args.seed)
    rate = 1.0 / (2 * args.r + 1)
    print(f"model: 2*(x-1/2)^{args.r}, {args.replicates} replicates, scale n^{rate:.3f}")
    print(f"{'n':>7} {'median raw':>12} {'median scaled':>14} {'p95 scaled':>12}")
    for n, errs in study.by_n("argmin_err").items():
        scaled = n ** rate * errs
        print(f"{n:7d} {np.median(errs):12.5f} {np.median(scaled):14.4f} "
              f"{np.quantile(scaled, 0.95):12.4f}")


if __name__ == "__main__":
    main()
