"""Compare the two-atom master-equation oracle against the effective rate model.

    python scripts/oracle_crosscheck.py [--out oracle_crosscheck.csv]
"""
import argparse
import csv
import time

from cavcool.crosscheck import ORACLE_PARAMS, oracle_crosscheck


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="oracle_crosscheck.csv")
    ap.add_argument("--alpha", type=float, default=0.25, help="coherent displacement of each phonon mode")
    args = ap.parse_args()

    t0 = time.perf_counter()
    r = oracle_crosscheck(ORACLE_PARAMS, alpha=args.alpha)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "m", "zeta"])
        w.writerows(zip(r.times, r.m, r.zeta))
    print(f"A_N = {r.A_N:.6g}, zeta0 = {r.zeta0:.4g}, window [{r.t_start:g}, {r.t_end:g}]")
    print(f"dm oracle = {r.dm_oracle:.5g}, dm rate model = {r.dm_predicted:.5g}, ratio = {r.ratio:.4f}")
    print(f"max edge population {r.max_edge_population:.1e}; {time.perf_counter() - t0:.0f} s; wrote {args.out}")


if __name__ == "__main__":
    main()
