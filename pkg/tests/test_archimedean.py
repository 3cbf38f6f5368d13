import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gammaincc

from charsumlab import archimedean as arch
from charsumlab.errors import PoleProximity

TRIVIAL = arch.LanglandsParams((0, 0, 0))
SKEW = arch.LanglandsParams((0.3, -0.15 + 0.4j, -0.15 - 0.4j))
UNBALANCED = arch.LanglandsParams((0.4, 0.1j, -0.2))


def V_meijer(y, alpha):
    """Independent oracle: V(y) = G^{d+1,0}_{1,d+1}(pi^d y^2 | 1; b_1..b_d, 0) / prod Gamma(b_j)."""
    b = [(0.5 - complex(a)) / 2 for a in alpha]
    z = mp.pi ** len(alpha) * mp.mpf(y) ** 2
    return complex(mp.meijerg([[], [1]], [b + [0], []], z) / mp.fprod([mp.gamma(x) for x in b]))


def test_gamma_R_at_one():
    assert abs(arch.gamma_R(1) - 1) < 1e-14


@given(st.floats(0.6, 5), st.floats(-20, 20))
def test_trivial_parameters_give_gamma_R_cubed(sig, t):
    s = complex(sig, t)
    assert abs(arch.gamma_factor(s, TRIVIAL) - arch.gamma_R(s) ** 3) <= 1e-12 * abs(arch.gamma_R(s)) ** 3


def test_log_gamma_against_mpmath_at_random_points():
    rng = np.random.default_rng(7)
    for _ in range(20):
        s = complex(rng.uniform(0.2, 6), rng.uniform(-40, 40))
        ref = sum(-(s - a) / 2 * mp.log(mp.pi) + mp.loggamma((s - a) / 2) for a in SKEW.alpha)
        got = SKEW.log_gamma(np.array([s]))[0]
        # compare exponentials so branch choices of log cannot matter
        assert abs(np.exp(got - complex(ref)) - 1) < 1e-12


def test_parameter_validation():
    with pytest.raises(ValueError):
        arch.LanglandsParams((0.5, 0, 0))
    with pytest.raises(ValueError):
        arch.LanglandsParams((0.1, 0.1, 0.1), zero_sum=True)
    assert arch.LanglandsParams.parse("0.2, -0.1+0.3i, -0.1-0.3i").self_conjugate
    assert not UNBALANCED.self_conjugate
    assert TRIVIAL.first_pole == -0.5


def test_poles_recorded_and_avoided():
    assert TRIVIAL.poles(1)[:2] == [0j, 0j]
    with pytest.raises(PoleProximity):
        arch.gamma_factor(0.0, TRIVIAL)
    with pytest.raises(PoleProximity):
        arch.V(1.0, TRIVIAL, arch.AFEConfig(sigma=-0.6))
    with pytest.raises(PoleProximity):
        arch.V(1.0, TRIVIAL, arch.AFEConfig(sigma=0.0))


@pytest.mark.parametrize("params", [TRIVIAL, SKEW, UNBALANCED], ids=["trivial", "skew", "unbalanced"])
@pytest.mark.parametrize("y", [1e-4, 0.01, 0.3, 1.0, 3.0, 20.0])
def test_V_against_meijer_G(params, y):
    assert abs(arch.V(y, params) - V_meijer(y, params.alpha)) < 1e-12


def test_degree_one_matches_incomplete_gamma():
    P = arch.LanglandsParams((0,))
    for y in (1e-3, 0.1, 0.7, 1.0, 2.5):
        assert abs(arch.V(y, P) - gammaincc(0.25, math.pi * y * y)) < 1e-13


@pytest.mark.parametrize("y", [0.2, 1.0, 5.0])
def test_contour_shift_invariance(y):
    ref = arch.V(y, TRIVIAL, arch.AFEConfig(sigma=3))
    for sigma in (2.0, 1.0, 0.01, -0.09, -0.25):
        assert abs(arch.V(y, TRIVIAL, arch.AFEConfig(sigma=sigma)) - ref) <= 1e-8


def test_small_y_limit_and_large_y_decay():
    assert abs(arch.V(1e-5) - 1) < 0.5
    dev = [abs(arch.V(y) - 1) for y in (1e-5, 1e-4, 1e-3)]
    assert dev[0] < dev[1] < dev[2]
    assert abs(arch.V(1e3)) <= 1e-6


def test_V_many_matches_V():
    ys = np.array([1e-4, 0.05, 0.9, 1.0, 7.0])
    for params in (TRIVIAL, SKEW):
        got = arch.V_many(ys, params)
        for y, v in zip(ys, got):
            assert abs(v - arch.V(float(y), params)) < 1e-11


def test_V_bound_dominates():
    for y in (1.0, 3.0, 30.0, 100.0):
        bound = arch.V_bound([y])[0]
        assert abs(V_meijer(y, TRIVIAL.alpha)) <= bound
        # the float quadrature bottoms out near 1e-22 in absolute terms
        assert abs(arch.V(y)) <= bound + 1e-20


def test_table_interpolation():
    tab = arch.VTable(TRIVIAL, 1e-3, 1e2)
    ys = np.geomspace(1e-3, 1e2, 37)
    assert np.max(np.abs(tab(ys) - arch.V_many(ys))) < 1e-12
    with pytest.raises(ValueError):
        tab([1e3])


def test_truncation_point_tail_is_small():
    N, tail = arch.truncation_point(1e-3)
    assert tail < 1e-12
    assert abs(arch.V(N * 1e-3)) < 1e-12


def test_quadrature_detail_reports_refinement_error():
    q = arch.V_detail(0.5, SKEW)
    assert q.err < 1e-10 and q.sigma < 0 and q.h <= 0.05
