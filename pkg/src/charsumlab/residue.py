"""Modular arithmetic, CRT, additive characters and the two value backends.

Every exponential sum in the package is a sum of unit terms ``e_q(k)``.  The
kernels produce integer phase arrays and hand them to :func:`sum_phases`,
which either evaluates them in floating point (histogram of phases followed
by a compensated dot product with the root table) or returns an exact element
of Z[zeta_q] (:class:`Cyclotomic`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    NonInvertible,
    NotCoprime,
    NotPrime,
    RangeTooLarge,
    UnsupportedModulus,
)

EPS = float(np.finfo(float).eps)
# Rounding budget per unit term e_q(k) in a sum (root table + product + accumulation).
UNIT_ERR = 4 * EPS
PRIME_CAP = 10**8


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


@dataclass(frozen=True)
class Modulus:
    q: int
    factorization: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("modulus must be positive")
        if math.prod(p**e for p, e in self.factorization) != self.q:
            raise ValueError(f"factorization does not multiply to {self.q}")

    @classmethod
    def of(cls, q: int) -> "Modulus":
        return cls(int(q), factorize(int(q)))

    def __int__(self) -> int:
        return self.q

    def __index__(self) -> int:
        return self.q

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factorization)

    @property
    def is_prime(self) -> bool:
        return len(self.factorization) == 1 and self.factorization[0][1] == 1

    @property
    def is_squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factorization)

    @property
    def phi(self) -> int:
        return math.prod((p - 1) * p ** (e - 1) for p, e in self.factorization)

    def require_prime(self) -> "Modulus":
        if not self.is_prime:
            raise NotPrime(f"{self.q} is not prime")
        return self

    def require_squarefree(self) -> "Modulus":
        if not self.is_squarefree:
            raise UnsupportedModulus(f"{self.q} is not squarefree")
        return self


ModLike = Union[int, Modulus]


def as_modulus(q: ModLike) -> Modulus:
    return q if isinstance(q, Modulus) else Modulus.of(q)


def is_prime(n: int) -> bool:
    return n >= 2 and as_modulus(n).is_prime


def euler_phi(n: int) -> int:
    return as_modulus(n).phi


def mobius(n: int) -> int:
    fac = factorize(n) if n > 1 else ()
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n) if n > 1 else ():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def mod_inverse(a: int, q: ModLike) -> int:
    q = int(q)
    if math.gcd(a, q) != 1:
        raise NonInvertible(f"{a} is not invertible mod {q}")
    return pow(a, -1, q) if q > 1 else 0


@lru_cache(maxsize=256)
def inverse_table(q: int) -> np.ndarray:
    """inv[x] = x^{-1} mod q for units, 0 elsewhere."""
    inv = np.zeros(q, dtype=np.int64)
    for x in range(1, q):
        if math.gcd(x, q) == 1:
            inv[x] = pow(x, -1, q)
    inv.setflags(write=False)
    return inv


def crt_split(a: int, q1: ModLike, q2: ModLike) -> tuple[int, int]:
    """Components (a1, a2) with a = a1*q2*inv(q2 mod q1) + a2*q1*inv(q1 mod q2)."""
    q1, q2 = int(q1), int(q2)
    if math.gcd(q1, q2) != 1:
        raise NotCoprime(f"gcd({q1}, {q2}) != 1")
    return a % q1, a % q2


def crt_combine(a1: int, a2: int, q1: ModLike, q2: ModLike) -> int:
    q1, q2 = int(q1), int(q2)
    if math.gcd(q1, q2) != 1:
        raise NotCoprime(f"gcd({q1}, {q2}) != 1")
    return (a1 * q2 * mod_inverse(q2 % q1, q1) + a2 * q1 * mod_inverse(q1 % q2, q2)) % (q1 * q2)


@lru_cache(maxsize=128)
def unit_roots(q: int) -> np.ndarray:
    """Table of e_q(k) = exp(2 pi i k / q), k = 0..q-1.

    The angle is reduced exactly in integers to [0, pi/4] before calling
    cos/sin, so every component is within ~3 ulp of the true value.
    """
    k = np.arange(q, dtype=np.int64)
    quad = (4 * k) // q
    j = 4 * k - quad * q
    flip = 2 * j > q
    jj = np.where(flip, q - j, j)
    theta = (np.pi / 2) * (jj / q)
    c, s = np.cos(theta), np.sin(theta)
    c0 = np.where(flip, s, c)
    s0 = np.where(flip, c, s)
    re = np.select([quad == 0, quad == 1, quad == 2], [c0, -s0, -c0], s0)
    im = np.select([quad == 0, quad == 1, quad == 2], [s0, c0, -s0], -c0)
    out = re + 1j * im
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# exact backend


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in divisors(n)[:-1]:
        num = _poly_divexact(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for i in range(len(num) - 1, dn - 1, -1):
        c = num[i] // den[-1]
        out[i - dn] = c
        if c:
            for j in range(dn + 1):
                num[i - dn + j] -= c * den[j]
    assert not any(num[:dn]), "inexact cyclotomic division"
    return out


class Cyclotomic:
    """Element of Z[zeta_q] stored as coefficients in the spanning set zeta^0..zeta^{q-1}.

    Equality is decided after reducing modulo Phi_q (for prime q this is the
    same as quotienting by the all-ones vector).
    """

    __slots__ = ("q", "coeffs", "_reduced")

    def __init__(self, q: int, coeffs: Iterable[int]):
        c = [int(x) for x in coeffs]
        if len(c) != q:
            raise ValueError("coefficient vector must have length q")
        self.q = q
        self.coeffs = tuple(c)
        self._reduced = None

    @classmethod
    def root(cls, q: int, k: int) -> "Cyclotomic":
        c = [0] * q
        c[k % q] = 1
        return cls(q, c)

    @classmethod
    def integer(cls, q: int, n: int) -> "Cyclotomic":
        c = [0] * q
        c[0] = n
        return cls(q, c)

    def _check(self, other: "Cyclotomic"):
        if other.q != self.q:
            raise ValueError("cyclotomic elements of different conductors")

    def __add__(self, other):
        if isinstance(other, int):
            other = Cyclotomic.integer(self.q, other)
        self._check(other)
        return Cyclotomic(self.q, (a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(self.q, (-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = Cyclotomic.integer(self.q, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return Cyclotomic(self.q, (other * a for a in self.coeffs))
        self._check(other)
        q = self.q
        out = [0] * q
        nz = [(j, b) for j, b in enumerate(other.coeffs) if b]
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in nz:
                    out[(i + j) % q] += a * b
        return Cyclotomic(q, out)

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclotomic":
        q = self.q
        return Cyclotomic(q, (self.coeffs[(-k) % q] for k in range(q)))

    def reduced(self) -> tuple[int, ...]:
        if self._reduced is None:
            phi = cyclotomic_polynomial(self.q)
            deg = len(phi) - 1
            r = list(self.coeffs)
            for i in range(len(r) - 1, deg - 1, -1):
                c = r[i]
                if c:
                    for j in range(deg + 1):
                        r[i - deg + j] -= c * phi[j]
            self._reduced = tuple(r[:deg]) if deg else (0,)
        return self._reduced

    def __eq__(self, other):
        if isinstance(other, int):
            other = Cyclotomic.integer(self.q, other)
        if not isinstance(other, Cyclotomic) or other.q != self.q:
            return NotImplemented
        return self.reduced() == other.reduced()

    def __hash__(self):
        return hash((self.q, self.reduced()))

    def is_zero(self) -> bool:
        return not any(self.reduced())

    def to_complex(self) -> complex:
        r = self.reduced()
        roots = unit_roots(self.q)[: len(r)]
        re = math.fsum(float(c) * roots[k].real for k, c in enumerate(r) if c)
        im = math.fsum(float(c) * roots[k].imag for k, c in enumerate(r) if c)
        return complex(re, im)

    def __repr__(self):
        return f"Cyclotomic(q={self.q}, reduced={self.reduced()})"


# ---------------------------------------------------------------------------
# floating values with error tracking


@dataclass(frozen=True)
class SumValue:
    re: float
    im: float
    err: float = 0.0
    exact: Cyclotomic | None = None

    @classmethod
    def of(cls, z: complex, err: float = 0.0) -> "SumValue":
        z = complex(z)
        return cls(z.real, z.imag, float(err))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self):
        return self.value

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def _coerce(self, other) -> "SumValue":
        if isinstance(other, SumValue):
            return other
        return SumValue.of(other)

    def __add__(self, other) -> "SumValue":
        o = self._coerce(other)
        z = self.value + o.value
        exact = self.exact + o.exact if self.exact is not None and o.exact is not None and self.exact.q == o.exact.q else None
        return SumValue(z.real, z.imag, self.err + o.err + EPS * abs(z), exact)

    __radd__ = __add__

    def __neg__(self) -> "SumValue":
        return SumValue(-self.re, -self.im, self.err, -self.exact if self.exact is not None else None)

    def __sub__(self, other) -> "SumValue":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SumValue":
        return self._coerce(other) - self

    def __mul__(self, other) -> "SumValue":
        o = self._coerce(other)
        z = self.value * o.value
        err = abs(self) * o.err + abs(o) * self.err + self.err * o.err + 2 * EPS * abs(z)
        exact = None
        if self.exact is not None and o.exact is not None and self.exact.q == o.exact.q:
            exact = self.exact * o.exact
        elif self.exact is not None and isinstance(other, int):
            exact = self.exact * other
        return SumValue(z.real, z.imag, err, exact)

    __rmul__ = __mul__

    def conjugate(self) -> "SumValue":
        return SumValue(self.re, -self.im, self.err, self.exact.conjugate() if self.exact is not None else None)

    def close_to(self, other, tol: float = 0.0) -> bool:
        """|self - other| within the combined tracked error plus ``tol``."""
        o = self._coerce(other)
        return abs(self.value - o.value) <= self.err + o.err + tol


def sum_phases(phases: np.ndarray, q: int, mode: str = "float") -> SumValue:
    """Sum of e_q(k) over the entries k of ``phases``.

    The phase histogram is an exact integer, so results are independent of
    how the phase array was partitioned.
    """
    counts = np.bincount(np.asarray(phases, dtype=np.int64).ravel() % q, minlength=q)
    return sum_counts(counts, q, mode)


def sum_counts(counts: np.ndarray, q: int, mode: str = "float") -> SumValue:
    n_terms = int(counts.sum())
    if mode == "exact":
        ex = Cyclotomic(q, counts.tolist())
        z = ex.to_complex()
        return SumValue(z.real, z.imag, UNIT_ERR * max(n_terms, 1), ex)
    if mode != "float":
        raise ValueError(f"unknown backend {mode!r}")
    roots = unit_roots(q)
    c = counts.astype(float)
    re = math.fsum(c * roots.real)
    im = math.fsum(c * roots.imag)
    return SumValue(re, im, UNIT_ERR * max(n_terms, 1))


def fsum_complex(values: np.ndarray) -> complex:
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def additive_character(x: int, q: ModLike, mode: str = "float") -> SumValue:
    q = int(q)
    k = x % q
    z = unit_roots(q)[k]
    exact = Cyclotomic.root(q, k) if mode == "exact" else None
    return SumValue(float(z.real), float(z.imag), UNIT_ERR, exact)


# ---------------------------------------------------------------------------
# primes


def _small_sieve(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def primes_in(lo: int, hi: int, congruence: Sequence[int] | None = None) -> list[int]:
    """Primes p in [lo, hi], optionally restricted to p = r (mod m); segmented sieve."""
    if hi > PRIME_CAP:
        raise RangeTooLarge(f"hi={hi} exceeds {PRIME_CAP}")
    if lo < 2:
        lo = 2
    if hi < lo:
        return []
    seg = np.ones(hi - lo + 1, dtype=bool)
    for p in _small_sieve(math.isqrt(hi)):
        p = int(p)
        start = max(p * p, -(-lo // p) * p)
        seg[start - lo :: p] = False
    out = np.flatnonzero(seg) + lo
    if congruence is not None:
        r, m = congruence
        out = out[out % m == r % m]
    return [int(p) for p in out]
