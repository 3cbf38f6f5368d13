import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from charsumlab import lfunctions as lf
from charsumlab.characters import enumerate_characters
from charsumlab.errors import NotPrimitive, PoleAtOne, TruncationInsufficient

FORM = lf.ToyGL3Form()


def quadratic_mod_5():
    return [c for c in enumerate_characters(5) if c.exponents == (2,)][0]


def test_zeta_two_against_direct_series():
    N = 10**6
    n = np.arange(1, N + 1, dtype=float)
    head = math.fsum(1 / n[::-1] ** 2)
    tail = 1 / N - 1 / (2 * N**2) + 1 / (6 * N**3)
    assert abs(lf.hurwitz_zeta(2, 1.0) - (head + tail)) < 1e-10
    assert abs(lf.riemann_zeta(2) - math.pi**2 / 6) < 1e-12


def test_zeta_half_two_methods():
    assert abs(lf.riemann_zeta(0.5) - lf.eta_zeta(0.5)) < 1e-12


@given(st.floats(0.01, 1.0))
def test_zeta_at_zero(a):
    assert abs(lf.hurwitz_zeta(0, a) - (0.5 - a)) < 1e-12


@given(st.floats(-1.5, 4), st.floats(-30, 30), st.floats(0.05, 1.0))
def test_hurwitz_against_mpmath(sig, t, a):
    s = complex(sig, t)
    if abs(s - 1) < 1e-3:
        return
    ref = complex(mp.zeta(mp.mpc(sig, t), a))
    assert abs(lf.hurwitz_zeta(s, a) - ref) <= 1e-10 * max(1, abs(ref))


def test_hurwitz_domain():
    with pytest.raises(PoleAtOne):
        lf.hurwitz_zeta(1, 0.5)
    with pytest.raises(ValueError):
        lf.hurwitz_zeta(-3, 0.5)
    with pytest.raises(ValueError):
        lf.hurwitz_zeta(2, 1.5)


def test_L_quadratic_mod_5_two_routes():
    chi = quadratic_mod_5()
    a = lf.dirichlet_L(0.5, chi)
    assert abs(a - lf.dirichlet_L_afe1(chi)) < 1e-8
    ref = complex(mp.dirichlet(0.5, [0, 1, -1, -1, 1]))
    assert abs(a - ref) < 1e-12


@pytest.mark.parametrize("q", [7, 13, 15])
def test_L_many_against_mpmath(q):
    s = 0.5 + 2j
    chars = enumerate_characters(q, "primitive")
    vals = lf.dirichlet_L_many(s, chars)
    for chi, v in zip(chars, vals):
        ref = complex(mp.dirichlet(s, [complex(chi(a)) for a in range(q)]))
        assert abs(v - ref) < 1e-10


@pytest.mark.parametrize("q", [5, 13])
def test_functional_equation(q):
    for chi in enumerate_characters(q, "primitive_even"):
        for s in (0.5, 0.5 + 0.5j):
            assert lf.functional_equation_residual(s, chi) <= 1e-8


def test_epsilon_examples_and_conjugation():
    assert abs(lf.epsilon_factor(quadratic_mod_5()).value - 1) < 1e-12
    for q in (7, 13, 35, 39):
        for chi in enumerate_characters(q, "primitive"):
            e = lf.epsilon_factor(chi).value
            assert abs(abs(e) - 1) < 1e-10
            assert abs(lf.epsilon_factor(chi.conjugate()).value - np.conj(e) * chi(-1) ** 3) < 1e-10
    with pytest.raises(NotPrimitive):
        lf.epsilon_factor(enumerate_characters(7)[0])


def test_d3_against_convolution():
    N = 1000
    d = [0] + [sum(1 for k in range(1, n + 1) if n % k == 0) for n in range(1, N + 1)]
    d3 = [0] + [sum(d[k] for k in range(1, n + 1) if n % k == 0) for n in range(1, N + 1)]
    assert list(lf.divisor_d3(N)) == d3
    assert FORM.coefficient(1) == 1 and FORM.coefficient(2) == 3
    assert lf.multiplicativity_violations(10**4) == 0


def test_d3_square_average_reported():
    ratios = lf.d3_average_ratios((10**3, 10**4))
    assert all(v > 0 for v in ratios.values())


def test_smoothed_partial_sum_matches_cube():
    chi = quadratic_mod_5()
    lhs = lf.twisted_central_value(FORM, chi)
    assert abs(lf.smoothed_partial_sum(FORM, chi) - lhs) <= 1e-4 * abs(lhs)


def test_odd_character_rejected():
    odd = [c for c in enumerate_characters(5, "primitive") if not c.is_even][0]
    with pytest.raises(ValueError):
        lf.twisted_central_value(FORM, odd)


@pytest.mark.parametrize("X", [0.1, 1.0, 10.0])
def test_afe_q5(X):
    rep = lf.afe_check(FORM, quadratic_mod_5(), X)
    assert rep.passed and rep.rel_err < 1e-8
    assert rep.tail < 1e-10


def test_afe_x_independence_q13():
    for chi in enumerate_characters(13, "primitive_even"):
        assert all(c.passed for c in lf.x_independence(FORM, chi, 1.0))


def test_afe_report_rows_q13():
    rows = [lf.afe_check(FORM, chi, 1.0).row() for chi in enumerate_characters(13, "primitive_even")]
    assert len(rows) == 5
    assert set(rows[0]) == {"q", "chi_index", "X", "lhs", "rhs", "abs_err", "pass"}


def test_afe_truncation_guard():
    with pytest.raises(TruncationInsufficient):
        lf.afe_check(FORM, quadratic_mod_5(), 1.0, n_max=5)
