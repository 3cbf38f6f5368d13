"""Dirichlet L-values from the Hurwitz zeta function, the d3 toy form, and
the approximate functional equation for its twists.

For the toy form lambda(n, 1) = d3(n) the twisted L-function is L(s, chi)^3,
with gamma factor Gamma_R(s)^3 (even chi) and root number g(chi)^3 / q^(3/2),
so the AFE can be checked against an independent Hurwitz-zeta evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, loggamma

from .archimedean import DEFAULT_PARAMS, LanglandsParams, V_bound, VTable, truncation_point
from .characters import DirichletCharacter, character_matrix
from .errors import NotPrimitive, PoleAtOne, RangeTooLarge, TruncationInsufficient
from .expsums import gauss_sum
from .report import Check
from .residue import SumValue

# B_2, B_4, ..., B_12
BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)
AFE_TRUNCATION = 1e-12
TAIL_LIMIT = 1e-8
N_CAP = 2 * 10**7


@dataclass(frozen=True)
class ZetaConfig:
    direct_terms: int = 50
    order: int = 6

    def terms_for(self, s: complex) -> int:
        return max(self.direct_terms, int(math.ceil(2 * abs(s))))


def hurwitz_zeta(s: complex, a, cfg: ZetaConfig = ZetaConfig()):
    """zeta(s, a) for a in (0, 1] (scalar or array) by Euler-Maclaurin summation."""
    s = complex(s)
    if abs(s - 1) < 1e-14:
        raise PoleAtOne("zeta(s, a) has a pole at s = 1")
    if s.real <= -2:
        raise ValueError("Euler-Maclaurin order 6 requires Re(s) > -2")
    a_arr = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any(a_arr <= 0) or np.any(a_arr > 1):
        raise ValueError("a must lie in (0, 1]")
    N = cfg.terms_for(s)
    k = np.arange(N)[:, None]
    head = np.exp(-s * np.log(k + a_arr[None, :])).sum(axis=0)
    x = N + a_arr
    logx = np.log(x)
    tail = np.exp((1 - s) * logx) / (s - 1) + 0.5 * np.exp(-s * logx)
    rising = s  # s (s+1) ... (s + 2j - 2)
    for j in range(1, cfg.order + 1):
        tail = tail + BERNOULLI[j - 1] / math.factorial(2 * j) * rising * np.exp(-(s + 2 * j - 1) * logx)
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
    out = head + tail
    return out if np.ndim(a) else complex(out[0])


def riemann_zeta(s: complex) -> complex:
    return hurwitz_zeta(s, 1.0)


def eta_zeta(s: complex, terms: int = 60) -> complex:
    """zeta(s) from the alternating eta series, accelerated by Borwein's method."""
    s = complex(s)
    n = terms
    d = [0.0] * (n + 1)
    acc = 0.0
    for i in range(n + 1):
        acc += math.factorial(n + i - 1) * 4**i / (math.factorial(n - i) * math.factorial(2 * i)) if i else 1 / n
        d[i] = n * acc
    total = sum((-1) ** k * (d[k] - d[n]) * complex(k + 1) ** (-s) for k in range(n))
    eta = -total / d[n]
    return eta / (1 - 2 ** (1 - s))


@lru_cache(maxsize=256)
def _hurwitz_vector(s: complex, q: int) -> np.ndarray:
    a = np.arange(1, q + 1) / q
    v = hurwitz_zeta(s, a)
    v.setflags(write=False)
    return v


def dirichlet_L_many(s: complex, chars: list[DirichletCharacter], chunk: int = 256) -> np.ndarray:
    """L(s, chi) = q^-s sum_a chi(a) zeta(s, a/q) for characters sharing one modulus."""
    if not chars:
        return np.zeros(0, dtype=complex)
    q = chars[0].q
    s = complex(s)
    if abs(s - 1) < 1e-14 and any(c.is_trivial for c in chars):
        raise PoleAtOne("L(s, chi_0) has a pole at s = 1")
    z = _hurwitz_vector(s, q)
    out = np.empty(len(chars), dtype=complex)
    for start in range(0, len(chars), chunk):
        block = character_matrix(chars[start : start + chunk])
        vals = np.roll(block, -1, axis=1) if q > 1 else block  # columns a = 1..q
        out[start : start + chunk] = vals @ z
    return out * q ** (-s)


def dirichlet_L(s: complex, chi: DirichletCharacter) -> complex:
    return complex(dirichlet_L_many(s, [chi])[0])


def epsilon_factor(chi: DirichletCharacter, degree: int = 3) -> SumValue:
    """g(chi)^degree / q^(degree/2); degree 3 is the root number of the toy form."""
    if not chi.is_primitive:
        raise NotPrimitive(f"{chi} is not primitive")
    g = gauss_sum(chi)
    out = g
    for _ in range(degree - 1):
        out = out * g
    return out * (chi.q ** (-degree / 2))


def completed_L(s: complex, chi: DirichletCharacter) -> complex:
    """(q/pi)^(s/2) Gamma(s/2) L(s, chi) for even chi."""
    if not chi.is_even:
        raise ValueError("completed_L implemented for even characters only")
    s = complex(s)
    return complex(np.exp(0.5 * s * math.log(chi.q / math.pi) + loggamma(s / 2))) * dirichlet_L(s, chi)


def functional_equation_residual(s: complex, chi: DirichletCharacter) -> float:
    eps = epsilon_factor(chi, 1).value
    return abs(completed_L(s, chi) - eps * completed_L(1 - s, chi.conjugate()))


def V1(y):
    """Degree-one cutoff for Gamma_R(s): Gamma(1/4, pi y^2) / Gamma(1/4)."""
    return gammaincc(0.25, math.pi * np.asarray(y, dtype=float) ** 2)


def dirichlet_L_afe1(chi: DirichletCharacter, X: float = 1.0) -> complex:
    """L(1/2, chi) for primitive even chi from the degree-one AFE."""
    if not (chi.is_primitive and chi.is_even):
        raise ValueError("requires a primitive even character")
    q = chi.q
    vals = chi.values()
    eps = epsilon_factor(chi, 1).value
    out = 0j
    for c, coeff, w in ((X / math.sqrt(q), vals, 1.0), (1 / (X * math.sqrt(q)), np.conj(vals), eps)):
        N = int(math.ceil(8.0 / c)) + 1
        n = np.arange(1, N + 1)
        terms = coeff[n % q] * V1(n * c) / np.sqrt(n)
        out += w * complex(math.fsum(terms.real), math.fsum(terms.imag))
    return out


@lru_cache(maxsize=4)
def _d3_block(M: int) -> np.ndarray:
    d = np.zeros(M + 1, dtype=np.int64)
    for k in range(1, M + 1):
        d[k::k] += 1
    d3 = np.zeros(M + 1, dtype=np.int64)
    for k in range(1, M + 1):
        d3[k::k] += d[k]
    d3.setflags(write=False)
    return d3


def divisor_d3(N: int) -> np.ndarray:
    """d3(n) for n = 0..N (entry 0 is 0); sieved once per power-of-two size."""
    M = 1 << max(10, int(N).bit_length())
    return _d3_block(M)[: N + 1]


@dataclass(frozen=True)
class ToyGL3Form:
    """The triple-divisor stand-in: lambda(n, 1) = d3(n), self-dual, alpha = (0, 0, 0)."""

    params: LanglandsParams = DEFAULT_PARAMS

    def coefficients(self, N: int) -> np.ndarray:
        return divisor_d3(N)

    def dual_coefficients(self, N: int) -> np.ndarray:
        return divisor_d3(N)

    def coefficient(self, n: int) -> int:
        return int(divisor_d3(max(n, 1))[n])


def _even_primitive(chi: DirichletCharacter):
    if not chi.is_primitive:
        raise NotPrimitive(f"{chi} is not primitive")
    if not chi.is_even:
        raise ValueError("requires an even character")


def twisted_central_value(form: ToyGL3Form, chi: DirichletCharacter) -> complex:
    _even_primitive(chi)
    return dirichlet_L(0.5, chi) ** 3


def twisted_central_values(form: ToyGL3Form, chars: list[DirichletCharacter]) -> np.ndarray:
    for c in chars:
        _even_primitive(c)
    return dirichlet_L_many(0.5, chars) ** 3


def smoothed_partial_sum(form: ToyGL3Form, chi: DirichletCharacter, N: int = 10**4) -> complex:
    """sum_n d3(n) chi(n) n^-1/2 exp(-(n/N)^2), which is L(1/2, chi)^3 - L(-3/2, chi)^3 / N^2 + ..."""
    M = int(6.5 * N)
    n = np.arange(1, M + 1)
    terms = form.coefficients(M)[1:] * chi.values()[n % chi.q] * np.exp(-((n / N) ** 2)) / np.sqrt(n)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass
class AFEReport:
    q: int
    chi_index: int
    X: float
    lhs: complex
    rhs: complex
    first_sum: complex
    second_sum: complex
    epsilon: complex
    terms: tuple[int, int]
    tail: float
    tol: float = 1e-4

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        return self.abs_err / max(abs(self.lhs), 1e-300)

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol

    def row(self) -> dict:
        return {
            "q": self.q,
            "chi_index": self.chi_index,
            "X": self.X,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_err": self.abs_err,
            "pass": self.passed,
        }


@lru_cache(maxsize=32)
def v_table(params: LanglandsParams, ymin: float, ymax: float) -> VTable:
    return VTable(params, ymin, ymax)


def tail_estimate(N: int, c: float, params: LanglandsParams) -> float:
    """Estimated sum_{n > N} |a_n| n^-1/2 |V(n c)| for coefficients of degree-k growth."""
    total, M = 0.0, float(N)
    k = params.degree
    while True:
        block = 2 * M * (1 + math.log(2 * M)) ** k / math.sqrt(M) * float(V_bound(M * c, params)[0])
        total += block
        if block < 1e-30 or M > 1e15:
            return total
        M *= 2


def afe_length(c: float, params: LanglandsParams, n_max: int | None = None) -> tuple[int, float]:
    """Number of terms for an AFE sum with argument n c, and the tail estimate there."""
    N, tail = truncation_point(c, params, AFE_TRUNCATION)
    if N > N_CAP:
        raise RangeTooLarge(f"AFE sum would need {N} terms (cap {N_CAP}); increase c")
    if n_max is not None and n_max < N:
        N, tail = n_max, tail_estimate(n_max, c, params)
        if tail > TAIL_LIMIT:
            raise TruncationInsufficient(f"tail estimate {tail:.3g} at N={N} exceeds {TAIL_LIMIT}")
    return N, tail


def afe_sum(coeffs: np.ndarray, chi_vals: np.ndarray, c: float, N: int, params: LanglandsParams) -> complex:
    """sum_{n <= N} a_n chi(n) n^-1/2 V(n c)."""
    n = np.arange(1, N + 1)
    table = v_table(params, _pow2_floor(c), _pow2_ceil(N * c))
    terms = coeffs[1 : N + 1] * chi_vals[n % chi_vals.size] * table(n * c) / np.sqrt(n)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _pow2_floor(y: float) -> float:
    return 2.0 ** math.floor(math.log2(y))


def _pow2_ceil(y: float) -> float:
    return 2.0 ** math.ceil(math.log2(y))


def afe_check(form: ToyGL3Form, chi: DirichletCharacter, X: float, n_max: int | None = None, tol: float = 1e-4) -> AFEReport:
    """Right side of the AFE at balance X against the Hurwitz-route L(1/2, chi)^3."""
    _even_primitive(chi)
    q = chi.q
    if q > 50:
        raise ValueError("afe_check is intended for q <= 50")
    if not 1e-2 <= X <= 1e2:
        raise ValueError("X must lie in [0.01, 100]")
    lhs = twisted_central_value(form, chi)
    vals = chi.values()
    c1, c2 = X / q**1.5, 1 / (X * q**1.5)
    N1, t1 = afe_length(c1, form.params, n_max)
    N2, t2 = afe_length(c2, form.params, n_max)
    s1 = afe_sum(form.coefficients(N1), vals, c1, N1, form.params)
    s2 = afe_sum(form.dual_coefficients(N2), np.conj(vals), c2, N2, form.params)
    eps = epsilon_factor(chi).value
    return AFEReport(q, chi.index, X, lhs, s1 + eps * s2, s1, s2, eps, (N1, N2), t1 + t2, tol)


def x_independence(form: ToyGL3Form, chi: DirichletCharacter, X: float, tol: float = 1e-6) -> list[Check]:
    """AFE right sides at X/2, X and 2X agree pairwise."""
    reps = [afe_check(form, chi, x) for x in (X / 2, X, 2 * X)]
    out = []
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = reps[i], reps[j]
            out.append(
                Check(
                    "afe_x_independence",
                    a.rhs,
                    b.rhs,
                    tol * max(abs(a.rhs), 1e-300),
                    params={"q": chi.q, "chi_index": chi.index, "X1": a.X, "X2": b.X},
                )
            )
    return out


def d3_average_ratios(Ns=(10**3, 10**4, 10**5), exponent: float = 1.1) -> dict[int, float]:
    """sum_{n <= N} d3(n)^2 / N^exponent for each N."""
    d3 = divisor_d3(max(Ns)).astype(float)
    cums = np.cumsum(d3**2)
    return {N: float(cums[N] / N**exponent) for N in Ns}


def multiplicativity_violations(N: int = 10**4) -> int:
    """Count coprime pairs (m, n), mn <= N, with d3(mn) != d3(m) d3(n)."""
    d3 = divisor_d3(N)
    bad = 0
    for m in range(2, int(math.isqrt(N)) + 1):
        n = np.arange(m + 1, N // m + 1)
        n = n[np.gcd(n, m) == 1]
        bad += int(np.count_nonzero(d3[m * n] != d3[m] * d3[n]))
    return bad
