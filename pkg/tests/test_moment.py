import math

import mpmath as mp
import numpy as np
import pytest

from charsumlab import moment as mo
from charsumlab.archimedean import V
from charsumlab.characters import character_matrix, enumerate_characters
from charsumlab.errors import EmptyFamily, NotCoprime, OverlappingBoxes
from charsumlab.lfunctions import ToyGL3Form

FORM = ToyGL3Form()
SMALL = mo.build_family(5, 40)  # four members q1 = 5, q2 in {41, 53, 61, 73}


@pytest.fixture(scope="module")
def report_l2():
    return mo.moment_pipeline(SMALL, ell=2)


def test_family_10_40():
    fam = mo.build_family(10, 40)
    assert sorted({a for a, _ in fam.members}) == [13, 17]
    assert sorted({b for _, b in fam.members}) == [41, 53, 61, 73]
    assert len(fam.members) == 8
    assert len(set(fam.moduli)) == len(fam.moduli)
    assert fam.Y == sum(a * b for a, b in fam.members)
    assert all(a % 4 == 1 and b % 4 == 1 for a, b in fam.members)


def test_family_rejections():
    with pytest.raises(OverlappingBoxes):
        mo.build_family(40, 40)
    with pytest.raises(OverlappingBoxes):
        mo.build_family(10, 15)
    with pytest.raises(EmptyFamily):
        mo.build_family(6, 40)
    with pytest.raises(ValueError):
        mo.build_family(2, 40)


def test_twist_validation():
    with pytest.raises(ValueError):
        mo.check_twist(SMALL, 6)
    mo.check_twist(SMALL, 6, any_ell=True)
    with pytest.raises(NotCoprime):
        mo.check_twist(SMALL, 5)
    with pytest.raises(ValueError):
        mo.check_twist(SMALL, 40)


def test_single_member_against_mpmath():
    fam = mo.ModulusFamily(5, 13, ((5, 13),))
    T, rows = mo.twisted_average_direct(fam, ell=2)
    ref = 0j
    for chi in enumerate_characters(65, "primitive_even"):
        L = complex(mp.dirichlet(0.5, [complex(chi(a)) for a in range(65)]))
        ref += 2 * L**3 * np.conj(chi(2))
    assert abs(T - ref) < 1e-10 * abs(ref)
    assert rows[0].even_count + rows[0].odd_count == 3 * 11


def test_ell_one_average_is_real_and_odd_characters_drop_out():
    T, _ = mo.twisted_average_direct(SMALL, ell=1)
    assert abs(T.imag) < 1e-10 * abs(T)
    assert abs(mo.twisted_average_projector(SMALL, ell=3) - mo.twisted_average_direct(SMALL, ell=3)[0]) < 1e-10 * abs(T)


def test_diagonal_character_weight():
    # sum over primitive chi mod q1 q2 of (chi(l) + chi(-l)) conj(chi)(l)
    for q1, q2 in SMALL.members:
        q = q1 * q2
        M = character_matrix(enumerate_characters(q, "primitive"))
        for ell in (1, 2, 3):
            w = np.sum((M[:, ell] + M[:, q - ell]) * np.conj(M[:, ell]))
            assert abs(w - ((q1 - 2) * (q2 - 2) + 1)) < 1e-9


def test_F_two_routes(report_l2):
    F = mo.F_term(SMALL, ell=2, X=1.0)
    assert abs(F.definition - F.decomposition) <= 1e-6 * abs(F.definition)
    assert F.minus_diagonal_terms == 0
    assert set(F.pieces) == {f"{s},{r}" for s in "+-" for r in ("1", "q1", "q2", "q1q2")}
    # dropping the coprimality condition on n changes the value
    assert abs(F.without_coprimality - F.definition) > 1e-6 * abs(F.definition)


def test_F_diagonal_matches_weight():
    ell, X = 2, 1.0
    F = mo.F_term(SMALL, ell=ell, X=X)
    expect = math.fsum(((a - 2) * (b - 2) + 1) * 3 / math.sqrt(2) * V(ell * X / (a * b) ** 1.5) for a, b in SMALL.members)
    assert abs(F.diagonal_signed - expect) < 1e-9 * expect


def test_leading_terms_approach_Y_for_small_X():
    ratios = []
    for X in (1.0, 0.3):
        F = mo.F_term(SMALL, ell=1, X=X)
        ratio = math.fsum(F.leading_unsigned.values()) / SMALL.Y
        assert abs(ratio - math.fsum(q * V(X / q**1.5) for q in SMALL.moduli) / SMALL.Y) < 1e-12
        ratios.append(ratio)
    # the same expression far out, where the profile sums would be too long to form
    ratios.append(math.fsum(q * V(1e-6 / q**1.5) for q in SMALL.moduli) / SMALL.Y)
    assert ratios[0] < ratios[1] < ratios[2] < 1
    assert abs(ratios[-1] - 1) < 0.05


def test_S_two_routes():
    S = mo.S_term(SMALL, ell=2, X=1.0)
    assert abs(S.definition - S.kloosterman) <= 1e-6 * abs(S.definition)
    assert 0 <= S.E_diagnostic <= S.E_trivial


def test_pipeline_identity_and_main_term(report_l2):
    r = report_l2
    assert r.rel_gap <= 1e-4 and r.passed
    assert r.main_term == 3 / math.sqrt(2) * SMALL.Y
    assert abs(r.residual - (r.T_direct - r.main_term)) < 1e-9
    assert len(r.members) == 4
    r1 = mo.moment_pipeline(SMALL, ell=1)
    assert r1.main_term == SMALL.Y


@pytest.mark.parametrize("X", [0.3, 3.0])
def test_pipeline_holds_for_other_X(X):
    r = mo.moment_pipeline(SMALL, ell=3, X=X)
    assert r.rel_gap <= 1e-8


def test_residual_ladder_shape():
    rows, _ = mo.residual_ladder(((5, 20), (5, 40)), ell=1)
    assert [r.members for r in rows] == [2, 4]
    assert all(r.ratio == abs(r.residual) / r.Y for r in rows)


def test_tiny_X_is_refused_rather_than_exhausting_memory():
    from charsumlab.errors import RangeTooLarge

    with pytest.raises(RangeTooLarge):
        mo.F_term(SMALL, ell=1, X=1e-5)
