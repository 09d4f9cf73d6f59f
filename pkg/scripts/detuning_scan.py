"""Collective rate A_N over the cavity detuning; the peak sits at the trap frequency."""
import argparse
import csv

import numpy as np

from cavcool.params import ModelParams
from cavcool.rate_model import adiabatic_rate, collective_rate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, nargs="+", default=[0.1, 0.3, 1.0])
    ap.add_argument("--points", type=int, default=600)
    ap.add_argument("--out", default="detuning_scan.csv")
    args = ap.parse_args()

    base = ModelParams()
    grid = np.linspace(-3.0, 3.0, args.points) * base.nu
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kappa", "delta", "A_N", "A_N_adiabatic"])
        for kappa in args.kappa:
            p = base.replace(kappa=kappa)
            rates = []
            for d in grid:
                q = p.replace(delta=d)
                a = collective_rate(q).A_N
                rates.append(a)
                w.writerow([kappa, d, a, adiabatic_rate(q)])
            print(f"kappa = {kappa:g}: max A_N = {max(rates):.4g} at delta/nu = {grid[np.argmax(rates)] / p.nu:.3f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
