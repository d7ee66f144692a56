"""Control overhead as tile duration, node count and hop count vary."""

import argparse

from _common import int_list, write_rows
from tdmh.netconfig import NetworkConfiguration, control_overhead, validate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tiles", type=int_list, default=[50, 100, 200, 500, 1000])
    ap.add_argument("--max-hops", type=int_list, default=[2, 4, 6, 8])
    ap.add_argument("--max-nodes", type=int_list, default=[16, 32, 64, 128, 256])
    ap.add_argument("--out", default="results/overhead.csv")
    args = ap.parse_args()

    rows = []
    for tile in args.tiles:
        for hops in args.max_hops:
            for nmax in args.max_nodes:
                cfg = NetworkConfiguration(tile_duration_ms=tile, max_hops=hops, max_nodes=nmax)
                if validate(cfg):
                    continue
                rows.append({"tile_duration_ms": tile, "max_hops": hops, "max_nodes": nmax,
                             "downlink_slot_ms": cfg.downlink_slot_duration_ms,
                             "overhead": round(control_overhead(cfg), 6)})
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
