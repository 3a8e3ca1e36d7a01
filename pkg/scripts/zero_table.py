"""Zeros of Q+ and Q- with their Bethe residuals, conformal and massive side by side."""
import argparse

import numpy as np

from odeim_bd.bethe import ConformalSource, MassiveSource, find_q_zeros, scan_q
from odeim_bd.core import ModelParams
from odeim_bd.field import FieldConfig, solve_field


def table(label, scan, window):
    for which in ("plus", "minus"):
        for z in find_q_zeros(scan, which, window=window):
            print(f"{label:10s} {which:6s} {z.theta.real:12.8f} {abs(z.bae_residual):10.2e} {z.note}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--g", type=float, default=0.1)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--lo", type=float, default=-1.0)
    ap.add_argument("--hi", type=float, default=2.5)
    ap.add_argument("--points", type=int, default=36)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    grid = np.linspace(args.lo, args.hi, args.points)
    print(f"{'source':10s} {'which':6s} {'theta_n':>12s} {'|BAE|':>10s}")
    conf = scan_q(ConformalSource(ModelParams(args.alpha, args.g)), grid, jobs=args.jobs)
    table("conformal", conf, (args.lo, args.hi))
    sol = solve_field(ModelParams(args.alpha, args.g, args.s), FieldConfig())
    mass = scan_q(MassiveSource(sol), grid, jobs=args.jobs)
    table(f"s={args.s:g}", mass, (args.lo, args.hi))


if __name__ == "__main__":
    main()
