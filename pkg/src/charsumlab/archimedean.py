"""Gamma factors from Langlands parameters and the AFE cutoff

    V(y) = 1/(2 pi i) int_(sigma) y^-s gamma(s + 1/2) / gamma(1/2) ds / s,
    gamma(s) = prod_i Gamma_R(s - alpha_i),  Gamma_R(s) = pi^(-s/2) Gamma(s/2).

The line integral is computed with the trapezoid rule, which converges
geometrically for integrands analytic in a strip around the line.  For
sigma < 0 the residue 1 at s = 0 is added back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

from .errors import PoleProximity, QuadratureNotConverged

RE_ALPHA_MAX = 0.4
POLE_GUARD = 1e-6
LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class LanglandsParams:
    alpha: tuple[complex, ...] = (0j, 0j, 0j)
    zero_sum: bool = False

    def __post_init__(self):
        alpha = tuple(complex(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if not alpha:
            raise ValueError("at least one Langlands parameter is required")
        for a in alpha:
            if a.real > RE_ALPHA_MAX + 1e-15:
                raise ValueError(f"Re(alpha) = {a.real} exceeds {RE_ALPHA_MAX}")
        if self.zero_sum and abs(sum(alpha)) > 1e-12:
            raise ValueError("alpha_1 + ... + alpha_d must vanish")

    @classmethod
    def parse(cls, text: str) -> "LanglandsParams":
        return cls(tuple(complex(x.strip().replace("i", "j")) for x in text.split(",")))

    @property
    def degree(self) -> int:
        return len(self.alpha)

    @property
    def self_conjugate(self) -> bool:
        """alpha closed under conjugation, so V is real on y > 0."""
        rest = list(self.alpha)
        for a in self.alpha:
            match = next((i for i, b in enumerate(rest) if abs(b - a.conjugate()) < 1e-14), None)
            if match is None:
                return False
            rest.pop(match)
        return True

    @property
    def first_pole(self) -> float:
        """Real part of the rightmost pole of gamma(s + 1/2)."""
        return max(a.real for a in self.alpha) - 0.5

    def poles(self, kmax: int = 3) -> list[complex]:
        """Poles of gamma(s) itself: s = alpha_i - 2k."""
        return sorted((a - 2 * k for a in self.alpha for k in range(kmax + 1)), key=lambda z: (-z.real, z.imag))

    def log_gamma(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for a in self.alpha:
            z = s - a
            out = out - 0.5 * z * LOG_PI + loggamma(z / 2)
        return out


DEFAULT_PARAMS = LanglandsParams()


def gamma_R(s: complex) -> complex:
    return complex(np.exp(-0.5 * s * LOG_PI + loggamma(s / 2)))


def _pole_distance(s: complex, params: LanglandsParams) -> float:
    best = math.inf
    for a in params.alpha:
        z = s - a
        k = max(0, round(-z.real / 2))
        best = min(best, abs(z + 2 * k))
    return best


def gamma_factor(s: complex, params: LanglandsParams = DEFAULT_PARAMS) -> complex:
    if _pole_distance(s, params) < POLE_GUARD:
        raise PoleProximity(f"s={s} lies within {POLE_GUARD} of a pole")
    return complex(np.exp(params.log_gamma(s)))


@dataclass(frozen=True)
class AFEConfig:
    X: float = 1.0
    sigma: float | None = None
    T: float | None = None
    h: float | None = None
    tol: float = 1e-8
    max_h: float = 0.05

    def __post_init__(self):
        if not self.X > 0:
            raise ValueError("X must be positive")
        for name in ("T", "h"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")


def auto_sigma(y: float, params: LanglandsParams) -> float:
    """sigma = 3 for y >= 1; for small y, halfway between s = 0 and the first pole."""
    return 3.0 if y >= 1 else params.first_pole / 2


def _strip_width(sigma: float, params: LanglandsParams) -> float:
    """Distance from Re(s) = sigma to the nearest singularity of the integrand."""
    sing = [0.0] + [a.real - 0.5 - 2 * k for a in params.alpha for k in range(40)]
    return min(abs(sigma - r) for r in sing)


def auto_step(y: float, sigma: float, params: LanglandsParams, cap: float = 0.05) -> float:
    d = _strip_width(sigma, params)
    return min(cap, 2 * math.pi / (40 / d + abs(math.log(y))))


@lru_cache(maxsize=256)
def auto_height(params: LanglandsParams, sigma: float, rel: float = 1e-18) -> float:
    """Smallest T (multiple of 5) past which |gamma(s+1/2)/s| < rel * its value at t = 0."""
    s0 = complex(sigma + 0.5)
    ref = params.log_gamma(s0).real - math.log(abs(sigma) + 1e-300)
    T = 5.0
    while T < 2000:
        s = complex(sigma + 0.5, T)
        if params.log_gamma(s).real - math.log(abs(complex(sigma, T))) - ref < math.log(rel):
            return T
        T += 5.0
    raise QuadratureNotConverged("integrand does not decay")


def _kernel(params: LanglandsParams, sigma: float, h: float, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes s_k and weights w_k with V(y) - [sigma < 0] ~ sum_k w_k y^(-s_k)."""
    m = int(math.ceil(T / h))
    t = h * np.arange(-m, m + 1)
    s = sigma + 1j * t
    lg = params.log_gamma(s + 0.5) - params.log_gamma(np.array([0.5 + 0j]))[0]
    w = np.exp(lg) / s * (h / (2 * math.pi))
    return s, w


def _quad(y: float, params: LanglandsParams, sigma: float, h: float, T: float) -> complex:
    s, w = _kernel(params, sigma, h, T)
    terms = np.exp(-s * math.log(y)) * w
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass
class Quadrature:
    value: complex
    err: float
    sigma: float
    h: float
    T: float


def _check_line(sigma: float, params: LanglandsParams):
    if abs(sigma) < POLE_GUARD:
        raise PoleProximity("the contour passes through s = 0")
    if sigma <= params.first_pole + POLE_GUARD:
        raise PoleProximity(f"sigma={sigma} is left of the first pole {params.first_pole}")


def V_detail(y: float, params: LanglandsParams = DEFAULT_PARAMS, cfg: AFEConfig | None = None) -> Quadrature:
    if not y > 0:
        raise ValueError("y must be positive")
    cfg = cfg or AFEConfig()
    sigma = auto_sigma(y, params) if cfg.sigma is None else float(cfg.sigma)
    _check_line(sigma, params)
    h = cfg.h or auto_step(y, sigma, params, cfg.max_h)
    T = cfg.T or auto_height(params, sigma)
    base = _quad(y, params, sigma, h, T)
    finer = _quad(y, params, sigma, h / 2, T)
    taller = _quad(y, params, sigma, h, 2 * T)
    err = max(abs(finer - base), abs(taller - base))
    if err > cfg.tol:
        raise QuadratureNotConverged(f"refinement moved V({y}) by {err:.3g}")
    value = finer + (1.0 if sigma < 0 else 0.0)
    return Quadrature(value, err, sigma, h, T)


def V(y: float, params: LanglandsParams = DEFAULT_PARAMS, cfg: AFEConfig | None = None):
    """The cutoff function; real when the parameters are closed under conjugation."""
    v = V_detail(y, params, cfg).value
    return v.real if params.self_conjugate else v


def V_many(ys, params: LanglandsParams = DEFAULT_PARAMS, chunk: int = 2_000_000) -> np.ndarray:
    """V at many points: y >= 1 on sigma = 3, y < 1 on the left line plus residue."""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0):
        raise ValueError("y must be positive")
    out = np.empty(ys.shape, dtype=complex)
    flat, res = ys.ravel(), out.reshape(-1)
    for right in (True, False):
        idx = np.nonzero(flat >= 1 if right else flat < 1)[0]
        if idx.size == 0:
            continue
        sigma = 3.0 if right else params.first_pole / 2
        lo, hi = flat[idx].min(), flat[idx].max()
        worst = lo if abs(math.log(lo)) > abs(math.log(hi)) else hi
        h = auto_step(worst, sigma, params, 0.05)
        s, w = _kernel(params, sigma, h, auto_height(params, sigma))
        rows = max(1, chunk // s.size)
        for start in range(0, idx.size, rows):
            sel = idx[start : start + rows]
            res[sel] = np.exp(-np.log(flat[sel])[:, None] * s[None, :]) @ w
        if not right:
            res[idx] += 1.0
    return out.real if params.self_conjugate else out


@dataclass
class VTable:
    """Cubic-spline table of V in log y, for evaluating V at very many points."""

    params: LanglandsParams
    ymin: float
    ymax: float
    step: float = 0.002
    spline: CubicSpline = field(init=False, repr=False)
    spline_im: CubicSpline | None = field(init=False, repr=False, default=None)

    def __post_init__(self):
        u = np.arange(math.log(self.ymin) - 4 * self.step, math.log(self.ymax) + 4 * self.step, self.step)
        v = np.asarray(V_many(np.exp(u), self.params), dtype=complex)
        self.spline = CubicSpline(u, v.real)
        if not self.params.self_conjugate:
            self.spline_im = CubicSpline(u, v.imag)

    def __call__(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if ys.size and (ys.min() < self.ymin * (1 - 1e-12) or ys.max() > self.ymax * (1 + 1e-12)):
            raise ValueError("y outside the tabulated range")
        u = np.log(ys)
        if self.spline_im is None:
            return self.spline(u)
        return self.spline(u) + 1j * self.spline_im(u)


@lru_cache(maxsize=16)
def _bound_table(params: LanglandsParams) -> tuple[np.ndarray, np.ndarray]:
    """sigma grid and log B(sigma), B(sigma) = (1/2pi) int |gamma(sigma+1/2+it)/gamma(1/2)| / |sigma+it| dt."""
    sigmas = np.arange(0.5, 80.5, 0.5)
    logb = np.empty_like(sigmas)
    lg_half = params.log_gamma(np.array([0.5 + 0j]))[0].real
    for i, sg in enumerate(sigmas):
        T = auto_height(params, float(sg), 1e-20)
        t = np.linspace(-T, T, int(T / 0.02) * 2 + 1)
        s = sg + 1j * t
        mag = np.exp(params.log_gamma(s + 0.5).real - lg_half) / np.abs(s)
        logb[i] = math.log(np.trapezoid(mag, t) / (2 * math.pi))
    return sigmas, logb


def V_bound(y, params: LanglandsParams = DEFAULT_PARAMS) -> np.ndarray:
    """Upper bound |V(y)| <= min_sigma y^-sigma B(sigma), from moving the line right."""
    sigmas, logb = _bound_table(params)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return np.exp(np.min(logb[None, :] - np.log(y)[:, None] * sigmas[None, :], axis=1))


def truncation_point(c: float, params: LanglandsParams = DEFAULT_PARAMS, tol: float = 1e-12, growth: int | None = None) -> tuple[int, float]:
    """Smallest N (on a 5% grid) with sum_{n > N} |a_n| n^-1/2 |V(n c)| estimated below tol.

    The coefficient bound is sum_{n <= x} |a_n| <= x (1 + log x)^k with k the
    degree (valid for d_k and for characters).  Returns (N, tail estimate).
    """
    k = params.degree if growth is None else growth

    def tail(N: float) -> float:
        total, M = 0.0, N
        while True:
            block = 2 * M * (1 + math.log(2 * M)) ** k / math.sqrt(M) * float(V_bound(M * c, params)[0])
            total += block
            if block < 1e-30 or M > 1e15:
                return total
            M *= 2

    N = max(1.0, 0.1 / c)
    while tail(N) >= tol:
        N *= 1.05
    return int(math.ceil(N)), tail(N)
