"""Estimated node current against tile duration, connectivity and data usage."""

import argparse

from _common import int_list, write_rows
from tdmh.netconfig import NetworkConfiguration
from tdmh.sim.campaigns import power_sweep


def floats(text):
    return [float(x) for x in text.split(",") if x]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tiles", type=int_list, default=[50, 100, 200, 500, 1000])
    ap.add_argument("--usage", type=floats, default=[0.0, 0.1, 0.25, 0.5, 1.0])
    ap.add_argument("--connectivity", type=floats, default=[0.0, 0.5, 1.0])
    ap.add_argument("--out", default="results/power.csv")
    args = ap.parse_args()

    rows = power_sweep(NetworkConfiguration(), args.tiles, args.usage, args.connectivity)
    for r in rows:
        r["current_ma"] = round(r["current_ma"], 6)
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
