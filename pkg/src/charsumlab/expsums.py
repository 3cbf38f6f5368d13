"""Gauss, Ramanujan, Kloosterman and rank-two hyper-Kloosterman sums.

Kernels build integer phase arrays and delegate the summation to
:func:`charsumlab.residue.sum_phases`, so ``mode="exact"`` swaps in the
cyclotomic backend without a second code path.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .characters import DirichletCharacter, character_matrix, enumerate_characters
from .errors import NotCoprime
from .report import Check
from .residue import (
    EPS,
    UNIT_ERR,
    ModLike,
    SumValue,
    as_modulus,
    divisors,
    fsum_complex,
    inverse_table,
    mobius,
    mod_inverse,
    primes_in,
    sum_counts,
    sum_phases,
    unit_roots,
)

TABLE_MAX = 1000
DIRECT_MAX = 10**4


def gauss_sum(chi: DirichletCharacter) -> SumValue:
    q = chi.q
    terms = chi.values() * unit_roots(q)
    return SumValue.of(fsum_complex(terms), 2 * UNIT_ERR * q)


def gauss_sums(chars: list[DirichletCharacter]) -> tuple[np.ndarray, float]:
    """Batched g(chi) for characters sharing one modulus, with an error bound."""
    if not chars:
        return np.zeros(0, dtype=complex), 0.0
    q = chars[0].q
    g = character_matrix(chars) @ unit_roots(q)
    return g, (2 * UNIT_ERR + q * EPS) * q


def gauss_splitting_check(chi1: DirichletCharacter, chi2: DirichletCharacter) -> Check:
    """g(chi1 chi2) by a direct sum mod q1 q2 against chi1(q2) chi2(q1) g(chi1) g(chi2)."""
    q1, q2 = chi1.q, chi2.q
    if math.gcd(q1, q2) != 1:
        raise NotCoprime(f"gcd({q1}, {q2}) != 1")
    q = q1 * q2
    a = np.arange(q)
    lhs_terms = chi1.values()[a % q1] * chi2.values()[a % q2] * unit_roots(q)
    lhs = SumValue.of(fsum_complex(lhs_terms), 3 * UNIT_ERR * q)
    rhs = chi1.evaluate(q2) * chi2.evaluate(q1) * gauss_sum(chi1) * gauss_sum(chi2)
    return Check(
        "gauss_splitting",
        lhs.value,
        rhs.value,
        tol=1e-9 * abs(lhs),
        tracked_err=lhs.err + rhs.err,
        params={"q1": q1, "q2": q2, "e1": list(chi1.exponents), "e2": list(chi2.exponents)},
    )


def ramanujan_sum(q: ModLike, n: int) -> int:
    """c_q(n) = sum_{d | gcd(q, n)} mu(q/d) d."""
    q = int(q)
    g = math.gcd(q, n)
    return sum(mobius(q // d) * d for d in divisors(g))


def ramanujan_sum_direct(q: ModLike, n: int, mode: str = "float") -> SumValue:
    q = int(q)
    a = np.arange(q)
    units = a[np.gcd(a, q) == 1]
    return sum_phases(units * (n % q), q, mode)


def kloosterman(a: int, b: int, q: ModLike, mode: str = "float") -> SumValue:
    """S(a, b; q) = sum over units x of e_q(a x + b x^{-1})."""
    q = as_modulus(q).require_prime().q
    inv = inverse_table(q)
    x = np.arange(1, q)
    return sum_phases((a % q) * x + (b % q) * inv[x], q, mode)


def kloosterman_row(q: int) -> tuple[np.ndarray, float]:
    """S(1, m; q) for all m mod q, by direct summation."""
    inv = inverse_table(q)
    x = np.arange(1, q)
    m = np.arange(q)[:, None]
    phases = (x[None, :] + m * inv[x][None, :]) % q
    s = unit_roots(q)[phases].sum(axis=1)
    return s, (4 + q) * EPS * q


def hyper_kloosterman(u: int, q: ModLike, mode: str = "float") -> SumValue:
    """K_q(u) = sum over units a, b of e_q(a + b + u (ab)^{-1}), direct O(q^2)."""
    q = as_modulus(q).require_prime().q
    if q > DIRECT_MAX:
        raise ValueError(f"q={q} exceeds direct limit {DIRECT_MAX}")
    inv = inverse_table(q)
    a = np.arange(1, q)
    u = u % q
    counts = np.zeros(q, dtype=np.int64)
    rows = max(1, 4_000_000 // q)
    for start in range(0, q - 1, rows):
        aa = a[start : start + rows, None]
        ph = (aa + a[None, :] + (u * inv[aa] % q) * inv[a][None, :]) % q
        counts += np.bincount(ph.ravel(), minlength=q)
    return sum_counts(counts, q, mode)


@dataclass(frozen=True)
class KloostermanTable:
    q: int
    values: np.ndarray
    err: float

    def __getitem__(self, u: int) -> SumValue:
        return SumValue.of(complex(self.values[u % self.q]), self.err)

    def as_dict(self) -> dict[int, SumValue]:
        return {u: self[u] for u in range(self.q)}


@lru_cache(maxsize=64)
def hyper_kloosterman_table(q: int) -> KloostermanTable:
    """All K_q(u) in O(q^2): K_q(u) = sum_{c != 0} S(1, c^{-1}; q) e_q(u c)."""
    q = as_modulus(q).require_prime().q
    if q > TABLE_MAX:
        raise ValueError(f"table precomputation limited to q <= {TABLE_MAX}")
    s, err_s = kloosterman_row(q)
    inv = inverse_table(q)
    c = np.arange(1, q)
    weights = s[inv[c]]
    u = np.arange(q)[:, None]
    k = unit_roots(q)[(u * c[None, :]) % q] @ weights
    k.setflags(write=False)
    err = q * (err_s + 2 * math.sqrt(q) * (4 + q) * EPS)
    return KloostermanTable(q, k, err)


def cubed_gauss_identity(q: ModLike, r: int, m: int) -> Check:
    """Sum over primitive chi of g(chi)^3 chi(r) conj(chi)(m) against phi(q) K_q(m r^{-1}) + 1."""
    qm = as_modulus(q).require_prime()
    q = qm.q
    if math.gcd(r * m, q) != 1:
        raise NotCoprime(f"gcd({r * m}, {q}) != 1")
    chars = enumerate_characters(q, "primitive")
    g, err_g = gauss_sums(chars)
    vals = character_matrix(chars)
    terms = g**3 * vals[:, r % q] * np.conj(vals[:, m % q])
    lhs = fsum_complex(terms)
    err_l = len(chars) * (3 * q * err_g + 4 * EPS * q**1.5)
    k = hyper_kloosterman(m * mod_inverse(r, q), q)
    rhs = qm.phi * k + 1
    return Check(
        "identity2",
        lhs,
        rhs.value,
        tol=1e-6 * q**3,
        tracked_err=err_l + rhs.err,
        params={"q": q, "r": r % q, "m": m % q},
    )


def cubed_gauss_sweep(q: int, pairs: list[tuple[int, int]] | None = None) -> list[Check]:
    """The cubed-Gauss identity for every (r, m) pair (or the given pairs) at prime q.

    The character side is a single matrix product over primitive characters;
    the Kloosterman side uses direct O(q^2) sums, one per distinct m r^{-1}.
    """
    qm = as_modulus(q).require_prime()
    chars = enumerate_characters(q, "primitive")
    g, err_g = gauss_sums(chars)
    vals = character_matrix(chars)
    lhs = (vals.T * g**3) @ np.conj(vals)  # [r, m]
    err_l = len(chars) * (3 * q * err_g + 4 * EPS * q**1.5) + (len(chars) + 4) * EPS * len(chars) * q**1.5
    if pairs is None:
        pairs = [(r, m) for r in range(1, q) for m in range(1, q)]
    inv = inverse_table(q)
    kcache: dict[int, SumValue] = {}
    out = []
    for r, m in pairs:
        u = m * int(inv[r % q]) % q
        if u not in kcache:
            kcache[u] = hyper_kloosterman(u, q)
        rhs = qm.phi * kcache[u] + 1
        out.append(
            Check(
                "identity2",
                complex(lhs[r % q, m % q]),
                rhs.value,
                tol=1e-6 * q**3,
                tracked_err=err_l + rhs.err,
                params={"q": q, "r": r % q, "m": m % q},
            )
        )
    return out


def all_character_variant(q: int, r: int, m: int) -> complex:
    """Same sum as the cubed-Gauss identity but over all characters mod q."""
    chars = enumerate_characters(q, "all")
    g, _ = gauss_sums(chars)
    vals = character_matrix(chars)
    return fsum_complex(g**3 * vals[:, r % q] * np.conj(vals[:, m % q]))


def identity2_pairs(q: int, qmax_full: int = 60, samples: int = 50, seed: int = 0) -> list[tuple[int, int]]:
    """Full sweep for q <= qmax_full, otherwise a seeded sample of (r, m) pairs."""
    if q <= qmax_full:
        return [(r, m) for r in range(1, q) for m in range(1, q)]
    rng = random.Random(seed * 1_000_003 + q)
    return [(rng.randrange(1, q), rng.randrange(1, q)) for _ in range(samples)]


@dataclass
class DeligneRow:
    p: int
    max_ratio: float
    argmax_u: int
    min_ratio: float
    conj_law_max_err: float
    err: float


def deligne_measure(pmax: int = 300, pmin: int = 3) -> list[DeligneRow]:
    """Per prime p, max over u != 0 of |K_p(u)| / p and the conjugation-law residual."""
    rows = []
    for p in primes_in(pmin, pmax):
        t = hyper_kloosterman_table(p)
        mags = np.abs(t.values[1:]) / p
        i = int(np.argmax(mags))
        neg = t.values[(-np.arange(p)) % p]
        rows.append(
            DeligneRow(
                p=p,
                max_ratio=float(mags[i]),
                argmax_u=i + 1,
                min_ratio=float(mags.min()),
                conj_law_max_err=float(np.max(np.abs(np.conj(t.values) - neg))),
                err=t.err,
            )
        )
    return rows


def conjugation_law_direct(p: int, mode: str = "float") -> tuple[float, float]:
    """max_u |conj K_p(u) - K_p(-u)| by direct sums, and the tracked error bound."""
    worst, err = 0.0, 0.0
    for u in range(p):
        a = hyper_kloosterman(u, p, mode)
        b = hyper_kloosterman(-u, p, mode)
        if mode == "exact" and a.exact.conjugate() != b.exact:
            return math.inf, 0.0
        worst = max(worst, abs(a.conjugate().value - b.value))
        err = max(err, a.err + b.err)
    return worst, err
