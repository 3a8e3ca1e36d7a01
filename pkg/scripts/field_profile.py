"""Solve the field and print eta0, the apex coefficients and a few mode profiles."""
import argparse

import numpy as np

from odeim_bd.core import ModelParams
from odeim_bd.field import FieldConfig, pde_residual_2d, solve_field


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--g", type=float, default=0.1)
    ap.add_argument("--s", type=float, default=1.0)
    ap.add_argument("--modes", type=int, default=12)
    args = ap.parse_args()

    sol = solve_field(ModelParams(args.alpha, args.g, args.s), FieldConfig(n_modes=args.modes))
    fit = sol.fit
    print(f"residual {sol.residual:.2e} after {sol.iterations} Newton steps; 2d residual {pde_residual_2d(sol):.2e}")
    print(f"eta0 = {sol.eta0:.12f}")
    if fit:
        print(f"c1 fit {fit['c1_fit']:.8f}  predicted {fit['c1_pred']:.8f}")
        print(f"c2 fit {fit['c2_fit']:.8f}  predicted {fit['c2_pred']:.8f}")
    print("gamma_m:", " ".join(f"{g:.4e}" for g in sol.gamma[:4]))
    print(f"{'rho':>10} " + " ".join(f"{'eta_' + str(m):>12}" for m in range(3)))
    for r in (1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0):
        i = int(np.argmin(np.abs(sol.rho - r)))
        print(f"{sol.rho[i]:10.4g} " + " ".join(f"{sol.modes[m, i]:12.6f}" for m in range(3)))


if __name__ == "__main__":
    main()
