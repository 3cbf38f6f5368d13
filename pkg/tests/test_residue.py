import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from charsumlab.errors import NonInvertible, NotCoprime, RangeTooLarge
from charsumlab.residue import (
    Cyclotomic,
    SumValue,
    additive_character,
    crt_combine,
    crt_split,
    divisors,
    euler_phi,
    factorize,
    inverse_table,
    is_prime,
    mobius,
    mod_inverse,
    primes_in,
    sum_phases,
)


def naive_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


SMALL_PRIMES = [p for p in range(2, 1000) if naive_is_prime(p)]


def test_inverse_examples():
    assert mod_inverse(1, 7) == 1
    assert mod_inverse(3, 7) == 5


def test_inverse_matches_brute_force_below_1000():
    for p in SMALL_PRIMES:
        a = np.arange(1, p)
        # for every a, the unique x in 1..p-1 with a*x = 1 mod p
        hits = (a[:, None] * a[None, :]) % p == 1
        brute = a[np.argmax(hits, axis=1)]
        assert np.array_equal(inverse_table(p)[1:], brute), p


def test_inverse_rejects_non_units():
    with pytest.raises(NonInvertible):
        mod_inverse(6, 9)


def test_crt_examples():
    assert crt_split(0, 3, 5) == (0, 0)
    assert crt_split(8, 3, 5) == (2, 3)
    with pytest.raises(NotCoprime):
        crt_split(1, 4, 6)


@given(st.sampled_from(SMALL_PRIMES[:40]), st.sampled_from(SMALL_PRIMES[:40]), st.integers(0, 10**6))
def test_crt_roundtrip(q1, q2, a):
    if q1 == q2:
        return
    a1, a2 = crt_split(a, q1, q2)
    assert crt_combine(a1, a2, q1, q2) == a % (q1 * q2)


def test_additive_character_examples():
    assert additive_character(0, 7).value == 1
    z = additive_character(5, 10)
    assert abs(z.value + 1) <= z.err
    for q in (7, 12, 97):
        s = sum_phases(np.arange(q), q)
        assert abs(s.value) <= s.err + 1e-12


def test_primes_in_examples():
    assert primes_in(10, 30, (1, 4)) == [13, 17, 29]
    assert primes_in(2, 2) == [2]
    assert primes_in(5, 4) == []
    with pytest.raises(RangeTooLarge):
        primes_in(1, 10**9)


@given(st.integers(0, 5000), st.integers(0, 400))
def test_primes_in_matches_trial_division(lo, width):
    assert primes_in(lo, lo + width) == [n for n in range(lo, lo + width + 1) if naive_is_prime(n)]


@given(st.integers(1, 20000))
def test_arithmetic_functions(n):
    assert math.prod(p**e for p, e in factorize(n)) == n
    assert all(naive_is_prime(p) for p, _ in factorize(n))
    assert euler_phi(n) == sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1) if n < 3000 else True
    assert divisors(n) == [d for d in range(1, n + 1) if n % d == 0] if n < 3000 else True
    assert sum(mobius(d) for d in divisors(n)) == (n == 1)
    assert is_prime(n) == naive_is_prime(n)


def test_cyclotomic_relations():
    for q in (5, 7, 12):
        total = Cyclotomic(q, [1] * q)
        # for squarefree q the sum of all q-th roots vanishes; for 12 it does too
        assert total.is_zero()
        a, b = Cyclotomic.root(q, 2), Cyclotomic.root(q, q - 1)
        assert a * b == Cyclotomic.root(q, 1)
        assert a.conjugate() == Cyclotomic.root(q, q - 2)
        assert abs((a + b).to_complex() - (np.exp(4j * np.pi / q) + np.exp(-2j * np.pi / q))) < 1e-12


def test_exact_and_float_sums_agree():
    phases = np.array([(x * x * x + 3 * x) for x in range(1, 41)])
    f = sum_phases(phases, 41)
    e = sum_phases(phases, 41, "exact")
    assert e.exact is not None
    assert abs(e.exact.to_complex() - f.value) <= f.err


@given(st.complex_numbers(max_magnitude=100, allow_nan=False), st.complex_numbers(max_magnitude=100, allow_nan=False))
def test_sumvalue_error_propagation(a, b):
    x, y = SumValue.of(a, 1e-9), SumValue.of(b, 2e-9)
    assert (x + y).close_to(a + b)
    assert (x * y).close_to(a * b, 1e-9)
    assert (x - y).err >= 3e-9
