"""Three traders, all pairs coupled, 40 shares with trader 1: n_3(t) for alpha_3 in {3, 10, 100}.

    python3 scripts/inertia_sweep.py --out runs/inertia
"""

import argparse
from pathlib import Path

import numpy as np

from fockmarket.dynamics import model1_series
from fockmarket.hamiltonians import ModelOneConfig
from fockmarket.svg import write_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/inertia")
    ap.add_argument("--t-max", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=400)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t = np.linspace(0, args.t_max, args.points)
    p = np.ones((3, 3)) - np.eye(3)
    curves = {}
    for a3 in (3, 10, 100):
        cfg = ModelOneConfig((1, 2, a3), p, (40, 0, 0))
        curves[f"alpha_3={a3}"] = model1_series(cfg, t)["n_3"]
        print(f"alpha_3={a3:>3}  peak n_3 = {curves[f'alpha_3={a3}'].max():.4f}")
    np.savetxt(out / "n3.csv", np.column_stack([t, *curves.values()]), delimiter=",",
               header="t," + ",".join(curves), comments="", fmt="%.12g")
    write_plot(out / "n3.svg", t, curves, "n_3(t), larger alpha_3 keeps fewer shares moving")


if __name__ == "__main__":
    main()
