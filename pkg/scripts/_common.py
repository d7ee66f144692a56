"""Shared bits of the experiment scripts."""

import csv
import os
import sys


def write_rows(rows, path):
    """Write dict rows as CSV to ``path`` ('-' for stdout)."""
    if not rows:
        return
    if path == "-":
        w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {path}", file=sys.stderr)


def int_list(text):
    return [int(x) for x in text.split(",") if x]
