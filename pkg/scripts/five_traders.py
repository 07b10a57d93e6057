"""Five traders with p_15 = p_25 = 0, alpha = (1..5), 40 shares with trader 1.

Also reports the three-trader control where trader 3 is isolated.

    python3 scripts/five_traders.py --out runs/five_traders [--check-exact]
"""

import argparse
from pathlib import Path

import numpy as np

from fockmarket.dynamics import model1_series
from fockmarket.hamiltonians import ModelOneConfig
from fockmarket.svg import write_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/five_traders")
    ap.add_argument("--t-max", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--check-exact", action="store_true",
                    help="compare with the N=40 sector evolution on a short window (~30 s)")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    p = np.ones((5, 5)) - np.eye(5)
    p[0, 4] = p[4, 0] = p[1, 4] = p[4, 1] = 0.0
    cfg = ModelOneConfig((1, 2, 3, 4, 5), p, (40, 0, 0, 0, 0))
    t = np.linspace(0, args.t_max, args.points)
    ts = model1_series(cfg, t)
    curves = {f"n_{l}": ts[f"n_{l}"] for l in range(1, 6)}
    for name, v in curves.items():
        print(f"{name}: min {v.min():7.3f}  max {v.max():7.3f}")
    write_plot(out / "shares.svg", t, curves, "five traders, t_5 linked to t_3 and t_4 only")
    np.savetxt(out / "shares.csv", np.column_stack([t, *curves.values()]), delimiter=",",
               header="t," + ",".join(curves), comments="", fmt="%.12g")

    if args.check_exact:
        short = np.linspace(0, 2.0, 21)
        a = model1_series(cfg, short, "onebody")
        b = model1_series(cfg, short, "exact")
        err = max(np.abs(a[f"n_{l}"] - b[f"n_{l}"]).max() for l in range(1, 6))
        print(f"one-body vs exact sector evolution on [0, 2]: {err:.2e}")

    q = np.zeros((3, 3))
    q[0, 1] = q[1, 0] = 1.0
    iso = model1_series(ModelOneConfig((1, 2, 3), q, (30, 0, 10)), t, "exact")
    print(f"isolated trader 3: max |n_3(t) - 10| = {np.abs(iso['n_3'] - 10).max():.1e}")


if __name__ == "__main__":
    main()
