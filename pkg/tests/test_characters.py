import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from charsumlab.characters import DirichletCharacter, character_matrix, enumerate_characters, primitive_sum_identity
from charsumlab.errors import NotCoprime, UnsupportedModulus


def is_primitive_oracle(chi):
    """chi is imprimitive iff it is trivial on units = 1 mod d for some proper divisor d of q."""
    q = chi.q
    for d in range(1, q):
        if q % d:
            continue
        if all(abs(chi(a) - 1) < 1e-9 for a in range(1, q) if math.gcd(a, q) == 1 and a % d == 1 % d):
            return False
    return True


def test_counts_mod_5_and_3():
    assert len(enumerate_characters(5)) == 4
    assert len(enumerate_characters(5, "primitive")) == 3
    even = enumerate_characters(5, "primitive_even")
    assert len(even) == 1 and even[0].exponents == (2,)  # the quadratic character
    assert len(enumerate_characters(3)) == 2
    prim = enumerate_characters(3, "primitive")
    assert len(prim) == 1 and prim[0].parity == -1


@pytest.mark.parametrize("q", [15, 35, 65, 77])
def test_primitive_count_matches_oracle(q):
    chars = enumerate_characters(q)
    flagged = [c for c in chars if c.is_primitive]
    oracle = [c for c in chars if is_primitive_oracle(c)]
    assert flagged == oracle
    p, pp = (p for p, _ in chars[0].modulus.factorization)
    assert len(oracle) == (p - 2) * (pp - 2)


@pytest.mark.parametrize("q", [7, 13, 15, 21, 65])
def test_orthogonality(q):
    M = character_matrix(enumerate_characters(q))
    phi = sum(1 for a in range(q) if math.gcd(a, q) == 1)
    assert np.allclose(M @ M.conj().T, phi * np.eye(len(M)), atol=1e-9)


@given(st.sampled_from([5, 7, 13, 15, 33, 65]), st.integers(1, 10**4), st.integers(1, 10**4), st.data())
def test_complete_multiplicativity(q, a, b, data):
    chi = data.draw(st.sampled_from(enumerate_characters(q)))
    assert chi(1) == 1
    assert abs(chi(a * b) - chi(a) * chi(b)) < 1e-12
    assert abs(chi(a) - chi(a + q)) < 1e-12
    assert abs(chi.conjugate()(a) - np.conj(chi(a))) < 1e-12


def test_crt_components():
    for chi in enumerate_characters(65):
        c1, c2 = chi.components()
        for a in range(65):
            assert abs(chi(a) - c1(a) * c2(a)) < 1e-12


def test_primitive_sum_examples():
    assert primitive_sum_identity(5, 2, 2) == 3
    assert primitive_sum_identity(5, 2, 3) == -1
    with pytest.raises(NotCoprime):
        primitive_sum_identity(5, 5, 1)


@pytest.mark.parametrize("q", [5, 7, 11, 13])
def test_primitive_sum_brute_force(q):
    M = character_matrix(enumerate_characters(q, "primitive"))
    for n, ell in itertools.product(range(1, q), repeat=2):
        assert abs(np.sum(M[:, n] * np.conj(M[:, ell])) - primitive_sum_identity(q, n, ell)) < 1e-9


def test_rejects_non_squarefree():
    with pytest.raises(UnsupportedModulus):
        enumerate_characters(9)


def test_index_is_enumeration_position():
    chars = enumerate_characters(35)
    assert [c.index for c in chars] == list(range(len(chars)))
    assert DirichletCharacter.trivial(35).index == 0
