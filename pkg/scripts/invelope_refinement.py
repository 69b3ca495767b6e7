#!/usr/bin/env python3
"""Grid-refinement self-consistency check for the limit-process simulator.

Draws matched-seed samples of the discretized invelope second derivative at
the origin on an m-point and a 2m-point grid and compares means and
variances against combined Monte Carlo standard errors.  No external
reference values exist for these moments, so agreement under refinement is
the strongest honest check.
"""

import argparse

import numpy as np

from convexreg import simulate_invelope
from convexreg.simulation import mix_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--r", type=int, default=2)
    ap.add_argument("--c", type=float, default=4.0)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20260808)
    args = ap.parse_args()

    seeds = [mix_seed(args.seed, args.m, k) for k in range(args.replicates)]
    coarse = np.array([simulate_invelope(args.r, args.c, args.m, s).h2_at_0 for s in seeds])
    fine = np.array([simulate_invelope(args.r, args.c, 2 * args.m, s).h2_at_0 for s in seeds])

    def sem(v):
        return v.std(ddof=1) / np.sqrt(v.size)

    def sevar(v):
        fourth = np.mean((v - v.mean()) ** 4)
        return np.sqrt(max(fourth - v.var(ddof=1) ** 2, 0.0) / v.size)

    for label, a, b, se in (
        ("mean", coarse.mean(), fine.mean(), np.hypot(sem(coarse), sem(fine))),
        ("var", coarse.var(ddof=1), fine.var(ddof=1), np.hypot(sevar(coarse), sevar(fine))),
    ):
        verdict = "consistent" if abs(a - b) <= 3 * se else "INCONSISTENT"
        print(f"h2(0) {label}: m={args.m}: {a:.4f}  m={2*args.m}: {b:.4f}  "
              f"|diff| {abs(a-b):.4f} vs 3*SE {3*se:.4f}  [{verdict}]")


if __name__ == "__main__":
    main()
