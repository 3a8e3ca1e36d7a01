"""Tabulate massive/conformal Q ratios along a decreasing sequence of s.

Both the fixed-theta comparison and the fixed-E scaling limit are printed, for
all three components, so the two notions of convergence can be compared.

    python3 scripts/conformal_limit_study.py --theta 0.3 --s 0.4 0.2 0.1 0.05
"""
import argparse
import warnings

from odeim_bd.bethe import WHICH, conformal_limit_study
from odeim_bd.core import ModelParams
from odeim_bd.field import FieldConfig, solve_field


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--g", type=float, default=0.1)
    ap.add_argument("--theta", type=float, default=0.3)
    ap.add_argument("--fixed-E", dest="fixed_E", type=float, default=1.0)
    ap.add_argument("--s", type=float, nargs="+", default=[0.4, 0.2, 0.1])
    args = ap.parse_args()

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        sols = {s: solve_field(ModelParams(args.alpha, args.g, s), FieldConfig()) for s in args.s}
    P = ModelParams(args.alpha, args.g, args.s[0])
    for mode, kw in (("fixed theta", {}), ("fixed E", {"fixed_E": args.fixed_E})):
        print(f"== {mode}")
        print(f"{'s':>6} {'theta':>10} " + " ".join(f"{'|r_' + w + ' - 1|':>14}" for w in WHICH))
        tab = conformal_limit_study(P, args.theta, args.s, solutions=sols, **kw)
        for r in tab.rows:
            print(f"{r.s:6.3f} {r.theta.real:10.5f} " + " ".join(f"{d:14.3e}" for d in r.discrepancy))


if __name__ == "__main__":
    main()
