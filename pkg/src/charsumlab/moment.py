"""Desk-scale twisted first moment over the family q = q1 q2.

    T = sum_q sum*_chi L(1/2, pi x chi) (1 + chi(-1)) conj(chi)(l)

is computed directly from central values and again as F + S, the two halves
of the approximate functional equation summed over the family.  Both halves
are evaluated twice: once with the inner character sum done by brute force,
once through closed forms (character orthogonality for F, the cubed-Gauss /
hyper-Kloosterman identity for S).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .archimedean import V
from .characters import DirichletCharacter, character_matrix, enumerate_characters
from .errors import EmptyFamily, NotCoprime, OverlappingBoxes
from .expsums import gauss_sums, hyper_kloosterman_table
from .lfunctions import ToyGL3Form, afe_length, dirichlet_L_many, divisor_d3, v_table, _pow2_ceil, _pow2_floor
from .residue import factorize, primes_in

BOX_MIN, BOX_MAX = 5, 500
TOY = ToyGL3Form()


@dataclass(frozen=True)
class ModulusFamily:
    Q1: int
    Q2: int
    members: tuple[tuple[int, int], ...]
    delta: float = 0.01

    @property
    def moduli(self) -> list[int]:
        return [a * b for a, b in self.members]

    @property
    def Y(self) -> int:
        return sum(self.moduli)

    @property
    def Q(self) -> int:
        return self.Q1 * self.Q2


def build_family(Q1: int, Q2: int, delta: float = 0.01) -> ModulusFamily:
    """All prime pairs q_i in [Q_i, 2 Q_i] with q_i = 1 mod 4, sorted by q1 q2."""
    for Q in (Q1, Q2):
        if not BOX_MIN <= Q <= BOX_MAX:
            raise ValueError(f"box parameter {Q} outside [{BOX_MIN}, {BOX_MAX}]")
    lo, hi = sorted([(Q1, 2 * Q1), (Q2, 2 * Q2)])
    if lo[1] >= hi[0]:
        raise OverlappingBoxes(f"[{Q1}, {2 * Q1}] and [{Q2}, {2 * Q2}] overlap")
    p1 = primes_in(Q1, 2 * Q1, (1, 4))
    p2 = primes_in(Q2, 2 * Q2, (1, 4))
    members = sorted(((a, b) for a in p1 for b in p2), key=lambda m: (m[0] * m[1], m))
    if not members:
        raise EmptyFamily(f"no admissible prime pairs for Q1={Q1}, Q2={Q2}")
    return ModulusFamily(Q1, Q2, tuple(members), delta)


def check_twist(fam: ModulusFamily, ell: int, any_ell: bool = False):
    if ell < 1 or ell >= fam.Q2:
        raise ValueError(f"l={ell} must satisfy 1 <= l < Q2={fam.Q2}")
    if not any_ell and ell > 1 and len(factorize(ell)) != 1:
        raise ValueError(f"l={ell} is not a prime power (pass any_ell to allow it)")
    for q in fam.moduli:
        if math.gcd(ell, q) != 1:
            raise NotCoprime(f"gcd({ell}, {q}) != 1")


def nu(r: int) -> int:
    return len(factorize(r))


@lru_cache(maxsize=16)
def _member_chars(q: int) -> tuple[list[DirichletCharacter], np.ndarray]:
    chars = enumerate_characters(q, "primitive")
    return chars, character_matrix(chars)


@lru_cache(maxsize=256)
def _central_cubes(q: int) -> np.ndarray:
    return dirichlet_L_many(0.5, enumerate_characters(q, "primitive")) ** 3


def _fsum(x) -> complex:
    x = np.asarray(x, dtype=complex)
    return complex(math.fsum(x.real), math.fsum(x.imag))


# ---------------------------------------------------------------------------
# direct side


@dataclass
class DirectMember:
    q1: int
    q2: int
    value: complex
    even_count: int
    odd_count: int


def twisted_average_direct(fam: ModulusFamily, form: ToyGL3Form = TOY, ell: int = 1) -> tuple[complex, list[DirectMember]]:
    """T from central values: 2 sum over primitive even chi of L(1/2, chi)^3 conj(chi)(l)."""
    check_twist(fam, ell, any_ell=True)
    total, rows = [], []
    for q1, q2 in fam.members:
        q = q1 * q2
        chars = enumerate_characters(q, "primitive")
        even = np.array([c.is_even for c in chars])
        cubes = _central_cubes(q)
        at_ell = np.array([c(ell) for c in chars])
        v = 2 * _fsum(cubes[even] * np.conj(at_ell[even]))
        rows.append(DirectMember(q1, q2, v, int(even.sum()), int((~even).sum())))
        total.append(v)
    return _fsum(total), rows


def twisted_average_projector(fam: ModulusFamily, ell: int = 1) -> complex:
    """Same average with (1 + chi(-1)) applied to every primitive chi, odd ones included."""
    out = []
    for q in fam.moduli:
        chars = enumerate_characters(q, "primitive")
        par = np.array([1 + c(-1) for c in chars])
        at_ell = np.array([c(ell) for c in chars])
        out.append(_fsum(_central_cubes(q) * par * np.conj(at_ell)))
    return _fsum(out)


# ---------------------------------------------------------------------------
# residue-class profiles of the two AFE sums


def _profile(q: int, c: float, form: ToyGL3Form) -> tuple[np.ndarray, int]:
    """P[a] = sum_{n = a mod q} lambda(n) n^-1/2 V(n c), with the AFE truncation."""
    N, _ = afe_length(c, form.params)
    n = np.arange(1, N + 1)
    table = v_table(form.params, _pow2_floor(c), _pow2_ceil(N * c))
    w = form.coefficients(N)[1:] / np.sqrt(n) * table(n * c)
    return np.bincount(n % q, weights=np.real(w), minlength=q), N


# ---------------------------------------------------------------------------
# F


@dataclass
class FResult:
    definition: complex
    decomposition: complex
    pieces: dict[str, complex]
    leading_unsigned: dict[int, float]
    diagonal_signed: float
    diagonal_unsigned: float
    minus_diagonal_terms: int
    without_coprimality: complex
    per_member: list[dict] = field(default_factory=list)

    @property
    def off_diagonal(self) -> complex:
        return self.definition - self.diagonal_signed


def F_term(fam: ModulusFamily, form: ToyGL3Form = TOY, ell: int = 1, X: float = 1.0) -> FResult:
    check_twist(fam, ell, any_ell=True)
    lam = form.coefficient(ell) / math.sqrt(ell)
    defs, decs, lit = [], [], []
    pieces: dict[str, list] = {}
    lead = {"1": [], "q1": [], "q2": [], "q1q2": []}
    diag_s, diag_u, per = [], [], []
    for q1, q2 in fam.members:
        q = q1 * q2
        c = X / q**1.5
        P, N = _profile(q, c, form)
        chars, M = _member_chars(q)
        # brute-force inner sum: sum*_chi (chi(a) + chi(-a)) conj(chi)(l)
        w = (M + M[:, (-np.arange(q)) % q]).T @ np.conj(M[:, ell % q])
        fdef = _fsum(P * w)
        a = np.arange(q)
        unit = np.gcd(a, q) == 1
        fdec = []
        for sign in (1, -1):
            for name, r in (("1", 1), ("q1", q1), ("q2", q2), ("q1q2", q)):
                phi_r = (q1 - 1 if r % q1 == 0 else 1) * (q2 - 1 if r % q2 == 0 else 1)
                cong = (a - sign * ell) % r == 0
                term = (-1) ** nu(r) * phi_r * math.fsum(P[cong & unit])
                literal = (-1) ** nu(r) * phi_r * math.fsum(P[cong])
                key = f"{'+' if sign > 0 else '-'},{name}"
                pieces.setdefault(key, []).append(term)
                fdec.append(term)
                lit.append(literal)
                if sign > 0:
                    lead[name].append(phi_r * lam * V(ell * c, form.params))
        vl = lam * V(ell * c, form.params)
        diag_s.append(((q1 - 2) * (q2 - 2) + 1) * vl)
        diag_u.append(q * vl)
        defs.append(fdef)
        decs.append(math.fsum(fdec))
        per.append({"q1": q1, "q2": q2, "N": N, "definition": fdef, "decomposition": decs[-1]})
    minus_diag = int(-ell >= 1)  # a diagonal n = -l would need n <= -1
    return FResult(
        definition=_fsum(defs),
        decomposition=_fsum(decs),
        pieces={k: math.fsum(v) for k, v in pieces.items()},
        leading_unsigned={k: math.fsum(v) for k, v in lead.items()},
        diagonal_signed=math.fsum(diag_s),
        diagonal_unsigned=math.fsum(diag_u),
        minus_diagonal_terms=minus_diag,
        without_coprimality=_fsum(lit),
        per_member=per,
    )


# ---------------------------------------------------------------------------
# S


@dataclass
class SResult:
    definition: complex | None
    kloosterman: complex
    E_diagnostic: float
    E_trivial: float
    per_member: list[dict] = field(default_factory=list)


def _kloosterman_weights(q1: int, q2: int, ell: int) -> np.ndarray:
    """sum_pm (phi(q1) K_q1(pm a l q2^-3) + 1)(phi(q2) K_q2(pm a l q1^-3) + 1) on units a, 0 elsewhere."""
    q = q1 * q2
    K1, K2 = hyper_kloosterman_table(q1), hyper_kloosterman_table(q2)
    a = np.arange(q)
    i2, i1 = pow(q2, -3, q1), pow(q1, -3, q2)
    w = np.zeros(q, dtype=complex)
    for sign in (1, -1):
        m = sign * a * ell
        w += ((q1 - 1) * K1.values[m * i2 % q1] + 1) * ((q2 - 1) * K2.values[m * i1 % q2] + 1)
    w[np.gcd(a * ell, q) != 1] = 0
    return w


def S_term(
    fam: ModulusFamily,
    form: ToyGL3Form = TOY,
    ell: int = 1,
    X: float = 1.0,
    brute_force: bool = True,
    e_terms: int | None = None,
) -> SResult:
    check_twist(fam, ell, any_ell=True)
    defs, kls, per = [], [], []
    for q1, q2 in fam.members:
        q = q1 * q2
        P, N = _profile(q, 1 / (X * q**1.5), form)
        wk = _kloosterman_weights(q1, q2, ell)
        skl = _fsum(P * wk) / q**1.5
        row = {"q1": q1, "q2": q2, "N": N, "kloosterman": skl}
        if brute_force:
            chars, M = _member_chars(q)
            g, _ = gauss_sums(chars)
            coef = g**3 * (1 + M[:, q - 1])
            idx = (np.arange(q) * ell) % q
            wd = np.conj(M[:, idx]).T @ coef
            sdef = _fsum(P * wd) / q**1.5
            row["definition"] = sdef
            defs.append(sdef)
        kls.append(skl)
        per.append(row)
    E, Etriv = E_diagnostic(fam, ell, X, e_terms)
    return SResult(_fsum(defs) if brute_force else None, _fsum(kls), E, Etriv, per)


def E_diagnostic(fam: ModulusFamily, ell: int, X: float, n_terms: int | None = None) -> tuple[float, float]:
    """sum_{q1} sum_{n <= N} |sum_{q2} phi(q2) q2^(-3/2) K_q1(n l q2^-3) K_q2(n l q1^-3)|^2 at s = 0,
    with N = Q^(3/2) sqrt(X), Q the largest modulus; also the same sum with |K| replaced by its Deligne bound."""
    Q = max(fam.moduli)
    N = n_terms or int(math.ceil(Q**1.5 * math.sqrt(X)))
    n = np.arange(1, N + 1)
    q1s = sorted({a for a, _ in fam.members})
    q2s = sorted({b for _, b in fam.members})
    E, triv = [], []
    for q1 in q1s:
        K1 = hyper_kloosterman_table(q1)
        inner = np.zeros(N, dtype=complex)
        bound = 0.0
        for q2 in q2s:
            if (q1, q2) not in fam.members:
                continue
            K2 = hyper_kloosterman_table(q2)
            coeff = (q2 - 1) / q2**1.5
            inner += coeff * K1.values[n * ell * pow(q2, -3, q1) % q1] * K2.values[n * ell * pow(q1, -3, q2) % q2]
            bound += coeff * 3 * q1 * 3 * q2
        E.append(math.fsum(np.abs(inner) ** 2))
        triv.append(N * bound**2)
    return math.fsum(E), math.fsum(triv)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class MomentReport:
    ell: int
    X: float
    Y: int
    T_direct: complex
    T_decomposed: complex
    main_term: complex
    F_term: complex
    S_term: complex
    leading: dict[str, float]
    diagonal_signed: float
    residual: complex
    rel_gap: float
    F_routes_gap: float
    S_routes_gap: float
    E_diagnostic: float
    E_trivial: float
    members: list[dict]
    tol: float = 1e-4

    @property
    def passed(self) -> bool:
        return self.rel_gap <= self.tol and self.F_routes_gap <= self.tol and self.S_routes_gap <= self.tol


def moment_pipeline(fam: ModulusFamily, form: ToyGL3Form = TOY, ell: int = 1, X: float = 1.0, any_ell: bool = False) -> MomentReport:
    check_twist(fam, ell, any_ell)
    T, direct_rows = twisted_average_direct(fam, form, ell)
    F = F_term(fam, form, ell, X)
    S = S_term(fam, form, ell, X)
    dec = F.definition + S.definition
    main = form.coefficient(ell) / math.sqrt(ell) * fam.Y
    scale = max(abs(T), 1e-300)
    members = []
    for d, f, s in zip(direct_rows, F.per_member, S.per_member):
        members.append({"q1": d.q1, "q2": d.q2, "T": d.value, "F": f["definition"], "S": s["definition"], "N_F": f["N"], "N_S": s["N"]})
    return MomentReport(
        ell=ell,
        X=X,
        Y=fam.Y,
        T_direct=T,
        T_decomposed=dec,
        main_term=main,
        F_term=F.definition,
        S_term=S.definition,
        leading=F.leading_unsigned,
        diagonal_signed=F.diagonal_signed,
        residual=T - main,
        rel_gap=abs(T - dec) / scale,
        F_routes_gap=abs(F.definition - F.decomposition) / max(abs(F.definition), 1e-300),
        S_routes_gap=abs(S.definition - S.kloosterman) / max(abs(S.definition), 1e-300),
        E_diagnostic=S.E_diagnostic,
        E_trivial=S.E_trivial,
        members=members,
    )


DEFAULT_LADDER = ((5, 20), (10, 40), (20, 80))


@dataclass
class TrendRow:
    Q1: int
    Q2: int
    members: int
    Y: int
    residual: complex
    ratio: float


def residual_ladder(ladder=DEFAULT_LADDER, ell: int = 1, form: ToyGL3Form = TOY) -> tuple[list[TrendRow], bool]:
    """|T - main term| / Y on growing families; the flag is True when the ratio strictly decreases."""
    rows = []
    for Q1, Q2 in ladder:
        fam = build_family(Q1, Q2)
        T, _ = twisted_average_direct(fam, form, ell)
        res = T - form.coefficient(ell) / math.sqrt(ell) * fam.Y
        rows.append(TrendRow(Q1, Q2, len(fam.members), fam.Y, res, abs(res) / fam.Y))
    ratios = [r.ratio for r in rows]
    return rows, all(b < a for a, b in zip(ratios, ratios[1:]))


S_TREND_LADDER = ((5, 40), (10, 80), (20, 100))


def s_ratio_trend(ladder=S_TREND_LADDER, ell: int = 1, form: ToyGL3Form = TOY) -> tuple[list[dict], bool]:
    """|S| / |main term| with X = Q^(-1/2), S from the hyper-Kloosterman route."""
    rows = []
    for Q1, Q2 in ladder:
        fam = build_family(Q1, Q2)
        X = (Q1 * Q2) ** -0.5
        S = S_term(fam, form, ell, X, brute_force=False, e_terms=1)
        main = form.coefficient(ell) / math.sqrt(ell) * fam.Y
        rows.append({"Q": Q1 * Q2, "Q1": Q1, "Q2": Q2, "X": X, "members": len(fam.members), "S": S.kloosterman, "ratio": abs(S.kloosterman) / main})
    ratios = [r["ratio"] for r in rows]
    return rows, all(b < a for a, b in zip(ratios, ratios[1:]))
