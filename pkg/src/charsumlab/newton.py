"""Laurent polynomials over F_p, Newton polyhedra at infinity, non-degeneracy.

Hulls are computed exactly with integer determinants.  Support sets here
have at most a dozen points in dimension <= 3, so facets are found by
testing every d-subset of points as a candidate supporting hyperplane, and
the face lattice is the closure of the facets under intersection.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import CoefficientVanishes
from .residue import SumValue, as_modulus, sum_counts

Exponent = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class LaurentPolynomial:
    terms: Mapping[Exponent, int]
    nvars: int

    def __post_init__(self):
        if not 1 <= self.nvars <= 3:
            raise ValueError("between 1 and 3 variables are supported")
        for e, c in self.terms.items():
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} does not have {self.nvars} entries")
            if c == 0:
                raise ValueError("zero coefficients must not be stored")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Iterable[int], int]] | Mapping, nvars: int | None = None):
        items = terms.items() if isinstance(terms, Mapping) else terms
        out: dict[Exponent, int] = {}
        for e, c in items:
            e = tuple(int(x) for x in e)
            if e in out:
                raise ValueError(f"duplicate exponent {e}")
            if c:
                out[e] = int(c)
        if not out:
            raise ValueError("empty polynomial")
        k = nvars if nvars is not None else len(next(iter(out)))
        return cls(out, k)

    @classmethod
    def from_json(cls, text: str) -> "LaurentPolynomial":
        data = json.loads(text)
        return cls.from_terms((d["exponents"], d["coeff"]) for d in data)

    def to_json(self) -> str:
        return json.dumps([{"exponents": list(e), "coeff": c} for e, c in sorted(self.terms.items())])

    @property
    def support(self) -> list[Exponent]:
        return sorted(self.terms)

    def restrict(self, exps: Iterable[Exponent]) -> "LaurentPolynomial":
        keep = set(exps)
        return LaurentPolynomial({e: c for e, c in self.terms.items() if e in keep}, self.nvars)

    def reduce_mod(self, p: int) -> "LaurentPolynomial":
        terms = {e: c % p for e, c in self.terms.items()}
        zero = [e for e, c in terms.items() if c == 0]
        if zero:
            raise CoefficientVanishes(f"coefficients of {zero} vanish mod {p}")
        return LaurentPolynomial(terms, self.nvars)

    def __call__(self, x: Iterable[int], p: int) -> int:
        x = tuple(x)
        total = 0
        for e, c in self.terms.items():
            t = c
            for xi, ei in zip(x, e):
                t = t * pow(xi, ei, p) % p
            total += t
        return total % p

    def __repr__(self):
        return f"LaurentPolynomial({dict(sorted(self.terms.items()))}, nvars={self.nvars})"


def twist_laurent(ell: int, n: int, q2: int, q2p: int, p: int) -> LaurentPolynomial:
    """The six-term Laurent polynomial attached to the q1 !| n case of the A-sum, over F_p.

    -l q2^-2 q2' n^-1 / x1 - l^2 q2^-1 q2' n^-1 / (x1 x2) + x1
        + q2'^-2 n^-1 x2 / x3 + l q2 q2'^-2 n^-1 / x3 + x3
    """
    if any(v % p == 0 for v in (ell, n, q2, q2p)):
        raise CoefficientVanishes(f"one of l, n, q2, q2' is divisible by {p}")
    i2, i2p, inn = pow(q2, -1, p), pow(q2p, -1, p), pow(n, -1, p)
    terms = {
        (-1, 0, 0): -ell * i2 * i2 * q2p * inn,
        (-1, -1, 0): -ell * ell * i2 * q2p * inn,
        (1, 0, 0): 1,
        (0, 1, -1): i2p * i2p * inn,
        (0, 0, -1): ell * q2 * i2p * i2p * inn,
        (0, 0, 1): 1,
    }
    return LaurentPolynomial({e: c % p for e, c in terms.items()}, 3).reduce_mod(p)


# ---------------------------------------------------------------------------
# torus evaluation


def _power_tables(f: LaurentPolynomial, p: int) -> list[list[np.ndarray]]:
    x = np.arange(1, p, dtype=np.int64)
    out = []
    for e in f.terms:
        out.append([np.array([pow(int(v), ei % (p - 1), p) for v in x], dtype=np.int64) for ei in e])
    return out


def _term_values(f: LaurentPolynomial, p: int, x1_index: int | None, tables) -> list[np.ndarray]:
    """Per-term monomial values on the torus (a slice at fixed x1 when k = 3)."""
    vals = []
    for tab in tables:
        if f.nvars == 1:
            v = tab[0]
        elif f.nvars == 2:
            v = tab[0][:, None] * tab[1][None, :] % p
        else:
            v = tab[0][x1_index] * (tab[1][:, None] * tab[2][None, :] % p) % p
        vals.append(v)
    return vals


def _slices(f: LaurentPolynomial, p: int):
    tables = _power_tables(f, p)
    if f.nvars < 3:
        yield None, _term_values(f, p, None, tables)
    else:
        for i in range(p - 1):
            yield i, _term_values(f, p, i, tables)


def exp_sum(f: LaurentPolynomial, p: int, mode: str = "float") -> SumValue:
    """Sum of e_p(f(x)) over x in (F_p^*)^k."""
    as_modulus(p).require_prime()
    coeffs = [c % p for c in f.terms.values()]
    counts = np.zeros(p, dtype=np.int64)
    for _, vals in _slices(f, p):
        phase = sum(c * v for c, v in zip(coeffs, vals)) % p
        counts += np.bincount(np.ravel(phase), minlength=p)
    return sum_counts(counts, p, mode)


def sqrt_cancellation_measure(f: LaurentPolynomial, p: int) -> float:
    """|sum_x e_p(f(x))| / p^{k/2}."""
    return abs(exp_sum(f, p)) / p ** (f.nvars / 2)


# ---------------------------------------------------------------------------
# exact geometry


def affine_rank(points: list[Exponent]) -> int:
    if len(points) <= 1:
        return 0
    base = points[0]
    rows = [[Fraction(a - b) for a, b in zip(pt, base)] for pt in points[1:]]
    rank, ncols = 0, len(base)
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _det(m: list[list[int]]) -> int:
    if not m:
        return 1
    if len(m) == 1:
        return m[0][0]
    return sum((-1) ** j * m[0][j] * _det([row[:j] + row[j + 1 :] for row in m[1:]]) for j in range(len(m)))


def _normal(vectors: list[list[int]], d: int) -> tuple[int, ...]:
    """Integer vector orthogonal to d-1 vectors in Z^d (generalized cross product)."""
    n = [(-1) ** i * _det([v[:i] + v[i + 1 :] for v in vectors]) for i in range(d)]
    g = math.gcd(*n)
    return tuple(x // g for x in n) if g else tuple(n)


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class Face:
    dim: int
    normal: tuple[int, ...]
    offset: int
    points: tuple[int, ...]  # indices into Polytope.points
    vertices: tuple[int, ...]  # indices into Polytope.vertices


@dataclass(frozen=True)
class Polytope:
    points: tuple[Exponent, ...]
    vertices: tuple[Exponent, ...]
    dim: int
    ambient_dim: int
    faces: tuple[Face, ...] = field(repr=False)

    @property
    def full_dimensional(self) -> bool:
        return self.dim == self.ambient_dim

    def face_points(self, face: Face) -> list[Exponent]:
        return [self.points[i] for i in face.points]

    def face_vertices(self, face: Face) -> list[Exponent]:
        return [self.vertices[i] for i in face.vertices]

    def proper_faces(self) -> list[Face]:
        return [fc for fc in self.faces if fc.dim < self.dim]


def convex_hull(points: Iterable[Iterable[int]]) -> Polytope:
    pts = sorted({tuple(int(x) for x in pt) for pt in points})
    if not pts:
        raise ValueError("empty point set")
    n = len(pts[0])
    d = affine_rank(pts)
    everything = frozenset(range(len(pts)))
    if d == 0:
        face = Face(0, (0,) * n, 0, (0,), (0,))
        return Polytope(tuple(pts), (pts[0],), 0, n, (face,))

    # coordinate projection that is injective on the affine hull
    idx = next(c for c in itertools.combinations(range(n), d) if affine_rank([tuple(p[i] for i in c) for p in pts]) == d)
    proj = [[p[i] for i in idx] for p in pts]

    facets: dict[frozenset, tuple[int, ...]] = {}
    for combo in itertools.combinations(range(len(pts)), d):
        base = proj[combo[0]]
        vecs = [[a - b for a, b in zip(proj[j], base)] for j in combo[1:]]
        nrm = _normal(vecs, d)
        if not any(nrm):
            continue
        c = _dot(nrm, base)
        side = [_dot(nrm, x) - c for x in proj]
        if all(s <= 0 for s in side):
            pass
        elif all(s >= 0 for s in side):
            nrm, c = tuple(-x for x in nrm), -c
        else:
            continue
        on = frozenset(i for i, x in enumerate(proj) if _dot(nrm, x) == c)
        if affine_rank([pts[i] for i in on]) == d - 1:
            facets.setdefault(on, nrm)

    lattice = set(facets)
    frontier = set(facets)
    while frontier:
        new = set()
        for a in frontier:
            for b in facets:
                s = a & b
                if s and s not in lattice:
                    new.add(s)
        lattice |= new
        frontier = new

    vertex_idx = sorted(next(iter(s)) for s in lattice if len(s) == 1 and affine_rank([pts[i] for i in s]) == 0)
    if d == 1 and not vertex_idx:
        vertex_idx = sorted(next(iter(s)) for s in facets)
    vpos = {i: k for k, i in enumerate(vertex_idx)}

    def lift(w):
        full = [0] * n
        for i, v in zip(idx, w):
            full[i] = v
        return tuple(full)

    faces = []
    for s in sorted(lattice, key=lambda s: (len(s), sorted(s))):
        containing = [nrm for f, nrm in facets.items() if s <= f]
        w = lift([sum(col) for col in zip(*containing)])
        off = _dot(w, pts[next(iter(s))])
        faces.append(
            Face(
                dim=affine_rank([pts[i] for i in s]),
                normal=w,
                offset=off,
                points=tuple(sorted(s)),
                vertices=tuple(vpos[i] for i in sorted(s) if i in vpos),
            )
        )
    faces.append(Face(d, (0,) * n, 0, tuple(sorted(everything)), tuple(range(len(vertex_idx)))))
    return Polytope(tuple(pts), tuple(pts[i] for i in vertex_idx), d, n, tuple(faces))


def newton_polyhedron(f: LaurentPolynomial) -> Polytope:
    """Convex hull of supp(f) together with the origin."""
    return convex_hull(list(f.terms) + [(0,) * f.nvars])


def faces_off_origin(P: Polytope) -> list[Face]:
    """Faces not containing the origin (for faces of a hull containing 0, the same as
    faces whose affine span misses 0)."""
    origin = P.points.index((0,) * P.ambient_dim)
    return [fc for fc in P.faces if origin not in fc.points]


def face_dichotomy_violations(P: Polytope) -> list[Face]:
    """Faces with >= 4 vertices that neither contain the origin nor are 3-dimensional."""
    off = {id(fc) for fc in faces_off_origin(P)}
    return [fc for fc in P.faces if len(fc.vertices) >= 4 and id(fc) in off and fc.dim != 3]


# ---------------------------------------------------------------------------
# non-degeneracy


@dataclass
class FaceReport:
    dim: int
    vertices: list[Exponent]
    terms: list[Exponent]
    degenerate: bool
    witness: tuple[int, ...] | None


@dataclass
class NondegeneracyReport:
    p: int
    faces: list[FaceReport]

    @property
    def nondegenerate(self) -> bool:
        return not any(fr.degenerate for fr in self.faces)

    @property
    def nontrivial_dims(self) -> list[int]:
        return sorted({fr.dim for fr in self.faces})


def critical_point(f: LaurentPolynomial, p: int) -> tuple[int, ...] | None:
    """Lexicographically smallest x in the torus with x_i df/dx_i = 0 for every i."""
    coeffs = [c % p for c in f.terms.values()]
    exps = list(f.terms)
    for i1, vals in _slices(f, p):
        ok = None
        for i in range(f.nvars):
            g = sum((c * (e[i] % p)) % p * v for c, e, v in zip(coeffs, exps, vals)) % p == 0
            ok = g if ok is None else ok & g
        hits = np.flatnonzero(np.ravel(ok))
        if hits.size:
            shape = np.shape(ok)
            pos = np.unravel_index(int(hits[0]), shape)
            coords = tuple(int(k) + 1 for k in pos)
            return coords if i1 is None else (i1 + 1, *coords)
    return None


def is_nondegenerate(f: LaurentPolynomial | None, p: int, params: Mapping | None = None) -> NondegeneracyReport:
    """Check every face of the Newton polyhedron not containing the origin.

    With ``params`` = {ell, n, q2, q2p} the polynomial is twist_laurent(...) over F_p.
    """
    as_modulus(p).require_prime()
    if params is not None:
        f = twist_laurent(params["ell"], params["n"], params["q2"], params["q2p"], p)
    f = f.reduce_mod(p)
    P = newton_polyhedron(f)
    reports = []
    for fc in faces_off_origin(P):
        on = [e for e in f.terms if _dot(fc.normal, e) == fc.offset]
        ft = f.restrict(on)
        w = critical_point(ft, p)
        reports.append(FaceReport(fc.dim, sorted(P.face_vertices(fc)), sorted(on), w is not None, w))
    return NondegeneracyReport(p, reports)
