"""Dirichlet characters modulo odd squarefree q, built prime by prime.

A character mod q = p_1 ... p_k is the product of characters mod each p_i;
the component mod p_i sends the fixed primitive root g_i to
exp(2 pi i e_i / (p_i - 1)).  The exponent vector (e_1, ..., e_k) is the
whole description, which makes primitivity (all e_i != 0) and conjugation
(e_i -> -e_i) immediate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import NotCoprime, UnsupportedModulus
from .residue import UNIT_ERR, ModLike, Modulus, SumValue, as_modulus, factorize, unit_roots

MAX_MODULUS = 10**4
FILTERS = ("all", "primitive", "primitive_even")


@lru_cache(maxsize=None)
def primitive_root(p: int) -> int:
    """Smallest primitive root of the prime p."""
    if p == 2:
        return 1
    cofactors = [(p - 1) // r for r, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, c, p) != 1 for c in cofactors):
            return g
    raise ValueError(f"no primitive root mod {p}")


@lru_cache(maxsize=None)
def dlog_table(p: int) -> np.ndarray:
    """log_g(x) for x = 0..p-1 with g = primitive_root(p); entry 0 is -1."""
    g = primitive_root(p)
    table = np.full(p, -1, dtype=np.int64)
    x = 1
    for j in range(p - 1):
        table[x] = j
        x = x * g % p
    table.setflags(write=False)
    return table


def _check_modulus(q: Modulus) -> Modulus:
    if q.q % 2 == 0 or not q.is_squarefree or len(q.primes) > 3:
        raise UnsupportedModulus(f"characters need odd squarefree q with <= 3 primes, got {q.q}")
    return q


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: Modulus
    generators: tuple[int, ...]
    exponents: tuple[int, ...]

    @classmethod
    def from_exponents(cls, q: ModLike, exponents) -> "DirichletCharacter":
        q = _check_modulus(as_modulus(q))
        exps = tuple(int(e) % (p - 1) for e, p in zip(exponents, q.primes))
        if len(exps) != len(q.primes):
            raise ValueError("one exponent per prime factor is required")
        return cls(q, tuple(primitive_root(p) for p in q.primes), exps)

    @classmethod
    def trivial(cls, q: ModLike) -> "DirichletCharacter":
        q = as_modulus(q)
        return cls.from_exponents(q, [0] * len(q.primes))

    @property
    def q(self) -> int:
        return self.modulus.q

    @property
    def primes(self) -> tuple[int, ...]:
        return self.modulus.primes

    @cached_property
    def order_base(self) -> int:
        """Values are N-th roots of unity, N = lcm(p - 1)."""
        return math.lcm(*(p - 1 for p in self.primes)) if self.primes else 1

    @property
    def is_primitive(self) -> bool:
        return all(e != 0 for e in self.exponents)

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    @property
    def index(self) -> int:
        """Position in the lexicographic enumeration of all characters mod q."""
        idx = 0
        for e, p in zip(self.exponents, self.primes):
            idx = idx * (p - 1) + e
        return idx

    def phase(self, n: int) -> int | None:
        """k with chi(n) = exp(2 pi i k / N), or None when gcd(n, q) > 1."""
        N = self.order_base
        k = 0
        for e, p in zip(self.exponents, self.primes):
            r = n % p
            if r == 0:
                return None
            k += e * int(dlog_table(p)[r]) * (N // (p - 1))
        return k % N

    def __call__(self, n: int) -> complex:
        k = self.phase(n)
        return 0j if k is None else complex(unit_roots(self.order_base)[k])

    def evaluate(self, n: int) -> SumValue:
        return SumValue.of(self(n), UNIT_ERR)

    @cached_property
    def parity(self) -> int:
        return 1 if self.phase(-1) == 0 else -1

    @property
    def is_even(self) -> bool:
        return self.parity == 1

    def conjugate(self) -> "DirichletCharacter":
        return DirichletCharacter(
            self.modulus,
            self.generators,
            tuple((-e) % (p - 1) for e, p in zip(self.exponents, self.primes)),
        )

    def components(self) -> list["DirichletCharacter"]:
        return [DirichletCharacter.from_exponents(p, [e]) for e, p in zip(self.exponents, self.primes)]

    def values(self) -> np.ndarray:
        """chi(n) for n = 0..q-1."""
        return character_matrix([self])[0]

    def __repr__(self):
        return f"DirichletCharacter(q={self.q}, exponents={self.exponents})"


def character_matrix(chars: list[DirichletCharacter]) -> np.ndarray:
    """Row i holds chi_i(n), n = 0..q-1; all characters share one modulus."""
    if not chars:
        return np.zeros((0, 0), dtype=complex)
    q = chars[0].modulus
    if q.q == 1:
        return np.ones((len(chars), 1), dtype=complex)
    N = chars[0].order_base
    n = np.arange(q.q)
    logs = np.stack([dlog_table(p)[n % p] for p in q.primes])  # k x q
    unit = np.all(logs >= 0, axis=0)
    scale = np.array([N // (p - 1) for p in q.primes], dtype=np.int64)
    exps = np.array([c.exponents for c in chars], dtype=np.int64) * scale
    phases = (exps @ np.where(logs >= 0, logs, 0)) % N
    out = unit_roots(N)[phases]
    out[:, ~unit] = 0
    return out


def enumerate_characters(q: ModLike, filter: str = "all") -> list[DirichletCharacter]:
    q = as_modulus(q)
    if q.q > MAX_MODULUS:
        raise UnsupportedModulus(f"q={q.q} exceeds {MAX_MODULUS}")
    _check_modulus(q)
    if filter not in FILTERS:
        raise ValueError(f"filter must be one of {FILTERS}")
    gens = tuple(primitive_root(p) for p in q.primes)
    lo = 0 if filter == "all" else 1
    out = []
    for exps in itertools.product(*(range(lo, p - 1) for p in q.primes)):
        chi = DirichletCharacter(q, gens, exps)
        if filter == "primitive_even" and not chi.is_even:
            continue
        out.append(chi)
    return out


def primitive_sum_identity(q: ModLike, n: int, ell: int) -> int:
    """Sum over primitive chi mod prime q of chi(n) conj(chi)(ell), in closed form."""
    q = as_modulus(q).require_prime()
    if math.gcd(n * ell, q.q) != 1:
        raise NotCoprime(f"gcd({n * ell}, {q.q}) != 1")
    return q.phi * ((n - ell) % q.q == 0) - 1
