#!/usr/bin/env python3
"""Size of A(0) = A(q1, q2, q2'; 0) against q1^2 gcd(q1, q2 - q2').

When q2 is a non-trivial cube root of unity times q2' modulo q1, the plain
difference is a unit yet A(0) is of size q1^3; the relevant quantity is
gcd(q1, q2^3 - q2'^3).  The table makes the three cases visible.
"""

import argparse
import math

from charsumlab.charsums import gcd_sensitivity


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qmax", type=int, default=60)
    args = ap.parse_args(argv)

    print("  q1  kind         q2  q2'  gcd(q2-q2')  gcd(q2^3-q2'^3)           A   |A|/(q1^2 gcd)  bound ok")
    for r in gcd_sensitivity(args.qmax):
        g3 = math.gcd(r["q1"], r["q2"] ** 3 - r["q2p"] ** 3)
        print(
            f"{r['q1']:4d}  {r['kind']:<10s} {r['q2']:4d} {r['q2p']:4d} {r['gcd']:12d} {g3:16d} {r['A']:11.0f} {r['ratio']:15.3f}  {r['match']}"
        )


if __name__ == "__main__":
    main()
