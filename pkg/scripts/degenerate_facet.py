#!/usr/bin/env python3
"""Report every face of the Newton polyhedron of the twisted Laurent polynomial
on which the restricted polynomial has a critical point in the torus.

For each prime the script prints the offending face, its vertices and a witness.
"""

import argparse

from charsumlab.newton import is_nondegenerate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ell", type=int, default=1)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--q2", type=int, default=5)
    ap.add_argument("--q2p", type=int, default=17)
    ap.add_argument("--primes", default="7,11,13,19,23")
    args = ap.parse_args(argv)

    params = {"ell": args.ell, "n": args.n, "q2": args.q2, "q2p": args.q2p}
    for p in (int(s) for s in args.primes.split(",")):
        rep = is_nondegenerate(None, p, params)
        bad = [f for f in rep.faces if f.degenerate]
        print(f"p={p}: {len(rep.faces)} faces off the origin, {len(bad)} degenerate")
        for f in bad:
            x2 = f.witness[1] if f.witness and len(f.witness) > 1 else None
            print(f"  dim {f.dim} face, vertices {f.vertices}")
            print(f"    witness {f.witness}; -l q2 mod p = {(-args.ell * args.q2) % p}; x2 = {x2}")


if __name__ == "__main__":
    main()
