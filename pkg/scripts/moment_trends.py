#!/usr/bin/env python3
"""Two trend experiments on nested modulus families.

* |T - main term| / Y along a ladder of boxes (the residual should shrink),
* |S| / |main term| with X = Q^(-1/2), S computed from hyper-Kloosterman weights.

Neither trend is asserted here; both are printed so the numbers can be inspected.
"""

import argparse

from charsumlab.moment import DEFAULT_LADDER, S_TREND_LADDER, residual_ladder, s_ratio_trend


def _boxes(text):
    out = []
    for item in text.split(","):
        a, b = item.split("x")
        out.append((int(a), int(b)))
    return tuple(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ell", type=int, default=1)
    ap.add_argument("--ladder", type=_boxes, default=DEFAULT_LADDER, help="e.g. 5x20,10x40,20x80")
    ap.add_argument("--s-ladder", type=_boxes, default=S_TREND_LADDER)
    ap.add_argument("--skip-s", action="store_true")
    args = ap.parse_args(argv)

    rows, decreasing = residual_ladder(args.ladder, ell=args.ell)
    print("Q1   Q2  members      Y   |residual|/Y")
    for r in rows:
        print(f"{r.Q1:3d} {r.Q2:4d} {r.members:8d} {r.Y:6d}   {r.ratio:.4f}")
    print(f"strictly decreasing: {decreasing}")

    if not args.skip_s:
        srows, sdec = s_ratio_trend(args.s_ladder, ell=args.ell)
        print("\n   Q  members         X   |S|/main")
        for r in srows:
            print(f"{r['Q']:4d} {r['members']:8d} {r['X']:.3e}   {r['ratio']:.5f}")
        print(f"strictly decreasing: {sdec}")


if __name__ == "__main__":
    main()
