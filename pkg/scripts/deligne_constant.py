#!/usr/bin/env python3
"""Measure max_u |K_p(u)| / p for the two-variable hyper-Kloosterman sum over primes p <= pmax.

Deligne's bound says the ratio is at most 3; the script prints the per-prime maximum
and the running record, and optionally writes a CSV.
"""

import argparse
import csv

from charsumlab.expsums import deligne_measure


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pmax", type=int, default=300)
    ap.add_argument("--csv", help="write rows here")
    args = ap.parse_args(argv)

    rows = deligne_measure(args.pmax)
    record = 0.0
    for r in rows:
        record = max(record, r.max_ratio)
        print(f"p={r.p:4d}  max|K|/p={r.max_ratio:.5f} at u={r.argmax_u:<4d} min={r.min_ratio:.5f}  record={record:.5f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p", "max_ratio", "argmax_u", "min_ratio", "conj_law_max_err"])
            for r in rows:
                w.writerow([r.p, f"{r.max_ratio:.12g}", r.argmax_u, f"{r.min_ratio:.12g}", f"{r.conj_law_max_err:.3g}"])
    print(f"overall max ratio {record:.6f} over {len(rows)} primes")


if __name__ == "__main__":
    main()
