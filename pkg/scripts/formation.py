"""Formation time on hexagonal meshes of growing size, lossless links.

    python scripts/formation.py --sizes 8,16,32,64,128 --seeds 0,1,2
"""

import argparse
import time

from _common import int_list, write_rows
from tdmh.sim.campaigns import formation_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int_list, default=[8, 16, 32, 64, 128])
    ap.add_argument("--ids", choices=["reverse", "forward", "both"], default="both")
    ap.add_argument("--seeds", type=int_list, default=[0])
    ap.add_argument("--out", default="results/formation.csv")
    args = ap.parse_args()

    orders = ["reverse", "forward"] if args.ids == "both" else [args.ids]
    rows = []
    for n in args.sizes:
        for ids in orders:
            for seed in args.seeds:
                t0 = time.perf_counter()
                m = formation_run(n, ids=ids, seed=seed)
                rows.append({"n": n, "max_nodes": n, "ids": ids, "seed": seed,
                             "formation_ms": m.formation_time_ms,
                             "wall_s": round(time.perf_counter() - t0, 2)})
                print(rows[-1], flush=True)
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
