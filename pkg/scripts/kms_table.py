"""Print the KMS case table and an equilibrium sweep over beta.

    python3 scripts/kms_table.py [--ql 10] [--phi 1]
"""

import argparse

import numpy as np

from fockmarket import kms


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ql", type=float, default=10.0)
    ap.add_argument("--phi", type=float, default=1.0)
    args = ap.parse_args()

    half = args.ql / 2
    rows = {">": (half + 1, half - 1), "=": (half, half), "<": (half - 1, half + 1)}
    print(f"{'Phi':>5} {'n_a ? n_c':>9}  case        outcome    beta0")
    for phi in (args.phi, 0.0, -args.phi):
        for rel, (na, nc) in rows.items():
            s = kms.solve_equilibrium(kms.KmsProblem(phi, args.ql, "classify", n_a=na, n_c=nc))
            beta = f"{s.beta0:.6g}" if s.beta0 is not None else ("any" if s.outcome == "solution" else "-")
            print(f"{phi:>5g} {rel:>9}  {s.case_label:<11} {s.outcome:<10} {beta}")

    print(f"\nsolve_pair sweep, Phi={args.phi}, Q_l={args.ql}")
    print(f"{'beta':>6} {'n_c':>12} {'n_a':>12} {'residual':>10}")
    for beta in np.linspace(0, 3, 7):
        s = kms.solve_equilibrium(kms.KmsProblem(args.phi, args.ql, "solve_pair", beta=float(beta)))
        res = abs(np.exp(beta * args.phi) - kms.kms_rhs(s.na0, s.nc0))
        print(f"{beta:>6.2f} {s.nc0:>12.8f} {s.na0:>12.8f} {res:>10.1e}")


if __name__ == "__main__":
    main()
