"""Convergence after the farthest node of a hexagonal mesh fails.

The node is killed right after its own uplink slot once the network has
formed; the time splits into the silent phase (until no neighbour hears it)
and the propagation phase (until the master drops its links).
"""

import argparse

from _common import int_list, write_rows
from tdmh.sim.campaigns import convergence_run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--max-nodes", type=int_list, default=[32, 128])
    ap.add_argument("--failed", type=int, default=1)
    ap.add_argument("--seeds", type=int_list, default=[0])
    ap.add_argument("--out", default="results/convergence.csv")
    args = ap.parse_args()

    rows = []
    for nmax in args.max_nodes:
        for seed in args.seeds:
            m = convergence_run(args.n, nmax, failed=args.failed, seed=seed)
            rows.append({"n": args.n, "max_nodes": nmax, "seed": seed, "failed": args.failed,
                         "formation_ms": m.formation_time_ms,
                         "convergence_ms": m.convergence_after_failure_ms,
                         "silent_ms": m.silent_phase_ms,
                         "propagation_ms": m.propagation_phase_ms})
            print(rows[-1], flush=True)
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
