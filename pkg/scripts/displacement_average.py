"""Turning-point midpoint, orbit time average and first-order estimate of the mean displacement."""
import argparse
import csv

from cavcool import displacement as disp
from cavcool.errors import EscapeOrbitError
from cavcool.params import ModelParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="displacement_average.csv")
    args = ap.parse_args()

    cols = ["mu", "m0", "first_order", "midpoint", "time_average", "ratio_avg_mid", "energy_drift"]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for mu in (0.002, 0.005, 0.01, 0.02):
            p = ModelParams(mu=mu)
            for m0 in (0.5, 1.0, 2.0, 5.0, 10.0):
                try:
                    mid = disp.mean_position(m0, p, "midpoint")
                except EscapeOrbitError:
                    print(f"mu = {mu:g}, m0 = {m0:g}: above the barrier, skipped")
                    continue
                traj = disp.orbit_from_phonons(m0, p, periods=50.0)
                avg = traj.time_average_x()
                w.writerow([mu, m0, disp.mean_position(m0, p, "first_order"), mid, avg, avg / mid,
                            traj.energy_drift])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
