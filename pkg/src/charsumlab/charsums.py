"""The composite sums A, B, C built from hyper-Kloosterman sums, their CRT
factorization C = A * B, and the closed forms for A.

A(n) = sum_{a mod q1} K_q1(a l q2^-3) K_q1(-a l q2'^-3) e_q1(a q2^-1 q2'^-1 n)
B(n) = sum_{a mod q2 q2'} K_q2(a l q1^-3) K_q2'(-a l q1^-3) e_{q2 q2'}(a q1^-1 n)
C(n) = sum_{a mod q1 q2 q2'} K_q1(..) K_q2(..) K_q1(..) K_q2'(..) e_{q1 q2 q2'}(a n)

A and B are evaluated from hyper-Kloosterman tables (O(q^2) precompute);
C is evaluated from its definition and only serves as a cross-check.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import ModulusTooLarge, NotCoprime
from .expsums import hyper_kloosterman_table, kloosterman, ramanujan_sum
from .newton import exp_sum, twist_laurent
from .report import Check
from .residue import EPS, UNIT_ERR, SumValue, as_modulus, fsum_complex, inverse_table, primes_in, sum_phases, unit_roots

A_MAX = 500
B_MAX = 10**5
C_MAX = 10**6
ORACLE_MAX = 30
XI_MAX = 60


@dataclass(frozen=True)
class TripleModulus:
    q1: int
    q2: int
    q2p: int
    ell: int = 1
    n: int = 0

    def __post_init__(self):
        for q in (self.q1, self.q2, self.q2p):
            as_modulus(q).require_prime()
        if self.q1 in (self.q2, self.q2p):
            raise NotCoprime("q1 must differ from q2 and q2'")
        if math.gcd(self.ell, self.q1 * self.q2 * self.q2p) != 1:
            raise NotCoprime("l must be coprime to q1 q2 q2'")
        if not 1 <= self.ell < min(self.q2, self.q2p):
            raise ValueError("l must satisfy 1 <= l < min(q2, q2')")

    @property
    def diagonal(self) -> bool:
        return self.q2 == self.q2p

    def key(self) -> dict:
        return {"q1": self.q1, "q2": self.q2, "q2p": self.q2p, "ell": self.ell, "n": self.n}

    def with_n(self, n: int) -> "TripleModulus":
        return TripleModulus(self.q1, self.q2, self.q2p, self.ell, n)


def _inv(a: int, m: int) -> int:
    return pow(a % m, -1, m)


def _product_err(k1, k2, e1, e2, terms: int) -> float:
    return terms * (np.max(np.abs(k1)) * e2 + np.max(np.abs(k2)) * e1 + e1 * e2 + 4 * EPS * np.max(np.abs(k1 * k2)))


def A_sum(t: TripleModulus, oracle: bool = False) -> SumValue:
    q1, ell, n = t.q1, t.ell, t.n
    if q1 > A_MAX:
        raise ModulusTooLarge(f"q1={q1} exceeds {A_MAX}")
    if oracle:
        return A_sum_naive(t)
    K = hyper_kloosterman_table(q1)
    i2, i2p = _inv(t.q2, q1), _inv(t.q2p, q1)
    a = np.arange(q1)
    k1 = K.values[a * ell * i2**3 % q1]
    k2 = K.values[(-a * ell * i2p**3) % q1]
    e = unit_roots(q1)[a * (i2 * i2p % q1) * (n % q1) % q1]
    val = fsum_complex(k1 * k2 * e)
    return SumValue.of(val, _product_err(k1, k2, K.err, K.err, q1) + UNIT_ERR * q1 * 9 * q1**2)


def A_sum_naive(t: TripleModulus, mode: str = "float") -> SumValue:
    """Five-fold definition: every hyper-Kloosterman sum opened, no tables."""
    q1 = t.q1
    if q1 > ORACLE_MAX:
        raise ModulusTooLarge(f"naive oracle limited to q1 <= {ORACLE_MAX}")
    inv = inverse_table(q1)
    i2, i2p = _inv(t.q2, q1), _inv(t.q2p, q1)
    u = np.arange(1, q1)
    a, b, c, d = np.meshgrid(u, u, u, u, indexing="ij", sparse=True)
    iab = inv[a] * inv[b] % q1
    icd = inv[c] * inv[d] % q1
    counts = np.zeros(q1, dtype=np.int64)
    for alpha in range(q1):
        c1 = alpha * t.ell * i2**3 % q1
        c2 = (-alpha * t.ell * i2p**3) % q1
        lin = alpha * i2 * i2p * t.n % q1
        ph = (a + b + c + d + c1 * iab + c2 * icd + lin) % q1
        counts += np.bincount(ph.ravel(), minlength=q1)
    from .residue import sum_counts

    return sum_counts(counts, q1, mode)


def B_sum(t: TripleModulus) -> SumValue:
    q1, q2, q2p, ell = t.q1, t.q2, t.q2p, t.ell
    M = q2 * q2p
    if M > B_MAX:
        raise ModulusTooLarge(f"q2 q2' = {M} exceeds {B_MAX}")
    K2, K2p = hyper_kloosterman_table(q2), hyper_kloosterman_table(q2p)
    a = np.arange(M)
    k1 = K2.values[a * ell * _inv(q1, q2) ** 3 % q2]
    k2 = K2p.values[(-a * ell * _inv(q1, q2p) ** 3) % q2p]
    e = unit_roots(M)[a * _inv(q1, M) % M * (t.n % M) % M]
    val = fsum_complex(k1 * k2 * e)
    return SumValue.of(val, _product_err(k1, k2, K2.err, K2p.err, M) + UNIT_ERR * M * 9 * q2 * q2p)


def _C_product_vector(t: TripleModulus) -> tuple[np.ndarray, float]:
    q1, q2, q2p, ell = t.q1, t.q2, t.q2p, t.ell
    M = q1 * q2 * q2p
    if M > C_MAX:
        raise ModulusTooLarge(f"q1 q2 q2' = {M} exceeds {C_MAX}")
    K1, K2, K2p = (hyper_kloosterman_table(q) for q in (q1, q2, q2p))
    a = np.arange(M)
    prod = (
        K1.values[a * ell * _inv(q2, q1) ** 3 % q1]
        * K2.values[a * ell * _inv(q1, q2) ** 3 % q2]
        * K1.values[(-a * ell * _inv(q2p, q1) ** 3) % q1]
        * K2p.values[(-a * ell * _inv(q1, q2p) ** 3) % q2p]
    )
    kmax = 3.0 * q1 * q1 * q2 * q2p * 9
    err_term = kmax * (K1.err / q1 * 2 + K2.err / q2 + K2p.err / q2p) * 3 + kmax * 8 * EPS
    return prod, err_term


def C_sum(t: TripleModulus) -> SumValue:
    """C(n) straight from the definition (sum over all residues mod q1 q2 q2')."""
    prod, err_term = _C_product_vector(t)
    M = prod.size
    a = np.arange(M)
    e = unit_roots(M)[a * (t.n % M) % M]
    return SumValue.of(fsum_complex(prod * e), M * (err_term + UNIT_ERR * np.max(np.abs(prod))))


def C_sum_all_n(t: TripleModulus) -> tuple[np.ndarray, float]:
    """C(n) for every n mod q1 q2 q2' at once (inverse DFT of the product vector)."""
    prod, err_term = _C_product_vector(t)
    M = prod.size
    vals = np.fft.ifft(prod) * M
    return vals, M * (err_term + np.max(np.abs(prod)) * EPS * (4 + 2 * math.log2(M)))


# ---------------------------------------------------------------------------
# closed forms


def A_closed_form_divisible(t: TripleModulus) -> int:
    """A(n) for q1 | n:  q1^2 c_q1(1 - q2'^-3 q2^3) - q1, an exact integer."""
    q1 = t.q1
    if t.n % q1:
        raise ValueError("closed form requires q1 | n")
    k = (1 - _inv(t.q2p, q1) ** 3 * pow(t.q2, 3, q1)) % q1
    return q1 * q1 * ramanujan_sum(q1, k) - q1


def laurent_torus_sum(t: TripleModulus, mode: str = "float") -> SumValue:
    return exp_sum(twist_laurent(t.ell, t.n, t.q2, t.q2p, t.q1), t.q1, mode)


def A_closed_form_laurent(t: TripleModulus, plus_sign: bool = False) -> SumValue:
    """A(n) for q1 !| n:  q1 * sum_{x in torus} e_q1(f(x)) - q1.

    Re-inserting the excluded value xi = -l q2 adds c_q1(1)^2 = 1 to the torus
    sum, so the correction is -q1.  ``plus_sign=True`` returns the +q1
    variant for comparison.
    """
    if t.n % t.q1 == 0:
        raise ValueError("Laurent form requires q1 !| n")
    s = laurent_torus_sum(t)
    return t.q1 * s + (t.q1 if plus_sign else -t.q1)


def B_closed_form_offdiag(t: TripleModulus) -> SumValue:
    """B(n) for q2 != q2':

    q2 q2' S(1, -l q1^-2 q2' n^-1; q2) S(1, l q1^-2 q2 n^-1; q2')  if gcd(n, q2 q2') = 1,
    and 0 otherwise.
    """
    q1, q2, q2p, ell, n = t.q1, t.q2, t.q2p, t.ell, t.n
    if t.diagonal:
        raise ValueError("closed form requires q2 != q2'")
    if math.gcd(n, q2 * q2p) != 1:
        return SumValue(0.0, 0.0, 0.0)
    s1 = kloosterman(1, -ell * _inv(q1, q2) ** 2 * q2p * _inv(n, q2), q2)
    s2 = kloosterman(1, ell * _inv(q1, q2p) ** 2 * q2 * _inv(n, q2p), q2p)
    return (q2 * q2p) * (s1 * s2)


# ---------------------------------------------------------------------------
# the xi-substitution chain for q1 !| n


@dataclass
class XiReport:
    triple: TripleModulus
    values: dict[str, complex]
    checks: list[Check]
    coprimality_violations: int
    missing_value_sum: complex
    plus_sign_gap: complex

    @property
    def passed(self) -> bool:
        return self.coprimality_violations == 0 and all(c.passed for c in self.checks)


def xi_substitution_check(t: TripleModulus, mode: str = "float") -> XiReport:
    """Evaluate every intermediate display between the congruence-restricted
    quadruple sum and the Laurent form, each by its own enumeration."""
    q1, q2, q2p, ell, n = t.q1, t.q2, t.q2p, t.ell, t.n
    if n % q1 == 0:
        raise ValueError("requires q1 !| n")
    if q1 > XI_MAX:
        raise ModulusTooLarge(f"q1={q1} exceeds {XI_MAX}")
    inv = inverse_table(q1)
    i2, i2p, inn = _inv(q2, q1), _inv(q2p, q1), _inv(n, q1)
    u = np.arange(1, q1)
    tol = 1e-7 * q1**3

    # mid-way: q1 * sum_{a,b,c,d units, l q2^-3 /(ab) - l q2'^-3 /(cd) + n/(q2 q2') = 0} e(a+b+c+d)
    b3, c3, d3 = np.meshgrid(u, u, u, indexing="ij", sparse=True)
    counts_mid = np.zeros(q1, dtype=np.int64)
    violations = 0
    for a in u:
        cong = (ell * i2**3 * inv[a] % q1 * inv[b3] - ell * i2p**3 * inv[c3] * inv[d3] + i2 * i2p * n) % q1 == 0
        cong = np.broadcast_to(cong, (q1 - 1,) * 3)
        ph = np.broadcast_to((a + b3 + c3 + d3) % q1, cong.shape)[cong]
        counts_mid += np.bincount(ph, minlength=q1)
        xi = np.broadcast_to((c3 * d3 % q1) * (n * q2p * q2p % q1) - ell * q2, cong.shape)[cong]
        violations += int(np.count_nonzero(np.gcd(xi % q1, q1) != 1))
    from .residue import sum_counts

    mid = q1 * sum_counts(counts_mid, q1, mode)

    # b, c, d form with (cd xi, q1) = 1
    xi_bcd = (c3 * d3 % q1 * (n * q2p * q2p % q1) - ell * q2) % q1
    ok = np.broadcast_to(xi_bcd != 0, (q1 - 1,) * 3)
    ph = (-ell * inv[b3] % q1 * (c3 * d3 % q1) % q1 * (i2 * i2 * pow(q2p, 3, q1) % q1) % q1 * inv[xi_bcd] + b3 + c3 + d3) % q1
    bcd = q1 * sum_phases(np.broadcast_to(ph, ok.shape)[ok], q1, mode)

    # xi, d form; restricted to xi + l q2 a unit, then the full sum
    bx, xx, dx = b3, c3, d3  # b, xi, d all range over units
    shift = (xx + ell * q2) % q1
    ph_x = (-ell * inv[bx] % q1 * shift % q1 * (i2 * i2 * q2p * inn % q1) % q1 * inv[xx] + bx + shift * (i2p * i2p * inn % q1) % q1 * inv[dx] + dx) % q1
    ph_x = np.broadcast_to(ph_x, (q1 - 1,) * 3)
    restricted_mask = np.broadcast_to(shift != 0, ph_x.shape)
    restricted = sum_phases(ph_x[restricted_mask], q1, mode)
    full = sum_phases(ph_x, q1, mode)
    missing = sum_phases(ph_x[~restricted_mask], q1, mode)  # the slice xi = -l q2

    laurent = laurent_torus_sum(t, mode)
    A = A_sum(t)
    values = {
        "A_table": A.value,
        "mid_way": mid.value,
        "bcd": bcd.value,
        "xi_restricted": (q1 * restricted).value,
        "xi_full_minus_missing": (q1 * full - q1 * missing).value,
        "laurent": (q1 * laurent - q1).value,
    }
    checks = [Check(k, v, A.value, tol, params=t.key()) for k, v in values.items() if k != "A_table"]
    checks.append(Check("missing_value", (full - restricted).value, missing.value, tol, params=t.key()))
    checks.append(Check("missing_value_is_one", missing.value, 1.0, 1e-9, params=t.key()))
    gap = (q1 * laurent + q1).value - A.value
    return XiReport(t, values, checks, violations, missing.value, gap)


# ---------------------------------------------------------------------------
# bounds


def corollary_regime(t: TripleModulus) -> int:
    """1: n = 0, q2 != q2'; 2: n = 0, q2 = q2'; 3: n != 0, q2 != q2'; 4: n != 0, q2 = q2'."""
    if t.n == 0:
        return 2 if t.diagonal else 1
    return 4 if t.diagonal else 3


def corollary_envelope(t: TripleModulus) -> float:
    """Shape of the bound on |C| with Q = q1 max(q2, q2'), Q2 = max(q2, q2')."""
    Q2 = max(t.q2, t.q2p)
    Q = t.q1 * Q2
    g = math.gcd(t.q1, t.n)
    return {
        1: 0.0,
        2: Q**3 * Q2,
        3: Q**2.5 * math.sqrt(Q2) * g,
        4: Q**2.5 * Q2**1.5 * g,
    }[corollary_regime(t)]


@dataclass
class BoundRow:
    triple: dict
    regime: int
    value: float
    envelope: float
    ratio: float


def corollary_bounds(triples: list[TripleModulus]) -> list[BoundRow]:
    rows = []
    for t in triples:
        c = abs(A_sum(t).value * B_sum(t).value)
        env = corollary_envelope(t)
        ratio = c / env if env else (0.0 if c < 1e-6 * t.q1**3 * t.q2**2 * t.q2p**2 else math.inf)
        rows.append(BoundRow(t.key(), corollary_regime(t), c, env, ratio))
    return rows


def sample_triples(
    qmax: int,
    count: int,
    seed: int = 0,
    primes: list[int] | None = None,
    regime: int | None = None,
    ells: tuple[int, ...] = (1, 2, 3),
) -> list[TripleModulus]:
    """Seeded admissible triples with moduli from ``primes`` (default odd primes 5..qmax)."""
    rng = random.Random(seed)
    pool = primes or primes_in(5, qmax)
    out: list[TripleModulus] = []
    seen = set()
    attempts = 0
    while len(out) < count and attempts < 200 * count:
        attempts += 1
        q1 = rng.choice(pool)
        q2 = rng.choice(pool)
        q2p = q2 if regime in (2, 4) or (regime is None and rng.random() < 0.25) else rng.choice(pool)
        if regime in (1, 3) and q2p == q2:
            continue
        ell = rng.choice(ells)
        M = q1 * q2 * q2p
        if regime in (1, 2):
            n = 0
        elif regime in (3, 4):
            n = rng.randrange(1, M)
        else:
            n = rng.randrange(M)
        try:
            t = TripleModulus(q1, q2, q2p, ell, n)
        except (NotCoprime, ValueError):
            continue
        if t in seen:
            continue
        seen.add(t)
        out.append(t)
    return out


@dataclass
class FactorizationResult:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def factorization_checks(triples: list[TripleModulus], rel_tol: float = 1e-6) -> list[Check]:
    """C = A B at each triple's own n, plus B(0) = C(0) = 0 off the diagonal."""
    out = []
    for t in triples:
        C = C_sum(t)
        AB = A_sum(t) * B_sum(t)
        scale = max(abs(C), abs(AB), 1.0)
        out.append(Check("C=AB", C.value, AB.value, rel_tol * scale, C.err + AB.err, t.key()))
        if not t.diagonal:
            t0 = t.with_n(0)
            scale0 = t.q1**3 * (t.q2 * t.q2p) ** 2
            out.append(Check("B(0)=0", B_sum(t0).value, 0.0, rel_tol * scale0 ** 0.5, params=t0.key()))
            out.append(Check("C(0)=0", C_sum(t0).value, 0.0, rel_tol * scale0, params=t0.key()))
    return out


def gcd_sensitivity(qmax: int = 60) -> list[dict]:
    """|A(0)| against q1^2 gcd(q1, q2 - q2') for three kinds of pair (q2, q2'):

    ``congruent``  q2 = q2' mod q1 (gcd = q1, predicted size q1^3),
    ``generic``    q2^3 != q2'^3 mod q1 (gcd = 1, predicted size q1^2),
    ``cube_root``  q2 = w q2' mod q1 with w^3 = 1, w != 1 (gcd = 1, yet q2^3 = q2'^3).

    ``match`` records whether |A| <= 2 q1^2 gcd(q1, q2 - q2'); ``exact`` whether A
    equals its closed form.
    """
    pool = primes_in(5, 400)
    rows = []
    for q1 in primes_in(5, qmax):
        wants = {"congruent": lambda a, b: (a - b) % q1 == 0, "generic": lambda a, b: (pow(a, 3, q1) - pow(b, 3, q1)) % q1 != 0}
        if q1 % 3 == 1:
            wants["cube_root"] = lambda a, b: (a - b) % q1 != 0 and (pow(a, 3, q1) - pow(b, 3, q1)) % q1 == 0
        for kind, test in wants.items():
            pair = next(((a, b) for a in pool for b in pool if a != b and q1 not in (a, b) and test(a, b)), None)
            if pair is None:
                continue
            t = TripleModulus(q1, pair[0], pair[1], 1, 0)
            A = A_sum(t).value
            g = math.gcd(q1, pair[0] - pair[1])
            rows.append(
                {
                    "q1": q1,
                    "kind": kind,
                    "q2": pair[0],
                    "q2p": pair[1],
                    "gcd": g,
                    "A": A.real,
                    "ratio": abs(A) / (q1 * q1 * g),
                    "match": abs(A) <= 2 * q1 * q1 * g,
                    "exact": abs(A - A_closed_form_divisible(t)) <= 1e-9 * q1**3,
                }
            )
    return rows
