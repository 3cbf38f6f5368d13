"""Verification suites run by ``charsumlab verify``.

Every suite returns a :class:`SuiteResult` holding named groups of
:class:`~charsumlab.report.Check` rows plus free-form measurements.  Nothing
time-dependent goes into a result, so reports are byte-reproducible.
"""

from __future__ import annotations

import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import archimedean as arch
from . import charsums as cs
from . import expsums as es
from . import lfunctions as lf
from . import moment as mo
from . import newton as nw
from .characters import character_matrix, enumerate_characters, primitive_sum_identity
from .report import Check
from .residue import primes_in

SUITES = ("characters", "expsums", "charsums", "newton", "archimedean", "lfun", "moment")


@dataclass
class RunConfig:
    suites: tuple[str, ...] = SUITES
    qmax: int = 60
    pmax: int = 300
    conj_pmax: int = 200
    triples: int = 200
    seed: int = 0
    newton_tuples: int = 20
    newton_primes: tuple[int, ...] = (7, 11, 13, 19, 23)
    Q1: int = 10
    Q2: int = 40
    ells: tuple[int, ...] = (1, 2, 3)
    afe_moduli: tuple[int, ...] = (5, 13, 17, 29)
    afe_X: tuple[float, ...] = (0.1, 1.0, 10.0)
    rel_tol: float = 1e-6
    afe_tol: float = 1e-4
    moment_tol: float = 1e-4
    out: str | None = None
    csv_dir: str | None = None

    @classmethod
    def field_types(cls) -> dict[str, str]:
        return {f.name: str(f.type) for f in fields(cls)}

    def coerce(self, key: str, text: str):
        """Parse a string for field ``key`` according to the field's declared type."""
        kind = self.field_types()[key]
        if kind.startswith("tuple[int"):
            return tuple(int(x) for x in text.split(",") if x.strip())
        if kind.startswith("tuple[float"):
            return tuple(float(x) for x in text.split(",") if x.strip())
        if kind.startswith("tuple[str"):
            return tuple(x.strip() for x in text.split(",") if x.strip())
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text


@dataclass
class SuiteResult:
    name: str
    groups: dict[str, list[Check]] = field(default_factory=dict)
    measurements: dict = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)

    def add(self, group: str, checks: list[Check]):
        self.groups.setdefault(group, []).extend(checks)

    def group_passed(self, group: str) -> bool:
        return all(c.passed for c in self.groups.get(group, []))

    @property
    def passed(self) -> bool:
        return all(self.group_passed(g) for g in self.groups) and all(self.flags.values())

    def summary(self) -> dict:
        return {
            "passed": self.passed,
            "groups": {
                g: {"cases": len(cs_), "failed": sum(not c.passed for c in cs_), "max_abs_err": max((c.abs_err for c in cs_), default=0.0)}
                for g, cs_ in sorted(self.groups.items())
            },
            "flags": dict(sorted(self.flags.items())),
            "measurements": self.measurements,
        }

    def payload(self) -> dict:
        return {**self.summary(), "cases": {g: [c.row() for c in cs_] for g, cs_ in sorted(self.groups.items())}}


# ---------------------------------------------------------------------------


def suite_characters(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("characters")
    rows = []
    for q in (5, 13, 15, 17, 29, 65, 105):
        chars = enumerate_characters(q, "all")
        M = character_matrix(chars)
        gram = M @ np.conj(M).T
        phi = sum(1 for a in range(q) if math.gcd(a, q) == 1)
        err = float(np.max(np.abs(gram - phi * np.eye(len(chars)))))
        rows.append(Check("orthogonality", err, 0.0, 1e-9 * phi, params={"q": q}))
        prim = enumerate_characters(q, "primitive")
        expect = math.prod(p - 2 for p in chars[0].primes)
        rows.append(Check("primitive_count", len(prim), expect, 0.0, params={"q": q}))
    res.add("structure", rows)
    rows = []
    for q in primes_in(3, 30):
        prim = enumerate_characters(q, "primitive")
        M = character_matrix(prim)
        for n in range(1, q):
            for ell in (1, 2, q - 1):
                brute = complex(np.sum(M[:, n] * np.conj(M[:, ell % q])))
                rows.append(Check("primitive_sum", brute, primitive_sum_identity(q, n, ell), 1e-9 * q, params={"q": q, "n": n, "ell": ell % q}))
    res.add("primitive_sum_identity", rows)
    return res


def suite_expsums(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("expsums")
    rows = []
    for q in primes_in(3, cfg.qmax):
        rows.extend(es.cubed_gauss_sweep(q, es.identity2_pairs(q, cfg.qmax, seed=cfg.seed)))
    res.add("identity2", rows)
    rows = []
    mods = (5, 13, 17, 29)
    for q1 in mods:
        for q2 in mods:
            if q1 == q2:
                continue
            for c1 in enumerate_characters(q1, "primitive"):
                for c2 in enumerate_characters(q2, "primitive"):
                    rows.append(es.gauss_splitting_check(c1, c2))
    res.add("gauss_splitting", rows)
    drows = es.deligne_measure(cfg.pmax)
    big = [r.max_ratio for r in drows]
    overall = max(big)
    res.measurements["deligne"] = {
        "pmax": cfg.pmax,
        "max_ratio": overall,
        "argmax_p": drows[big.index(overall)].p,
        "min_of_max_ratio_p_gt_7": min(r.max_ratio for r in drows if r.p > 7),
    }
    res.flags["deligne_ratio_in_[1,3]"] = 1.0 <= overall <= 3.0
    rows = []
    for p in primes_in(3, cfg.conj_pmax):
        worst, err = es.conjugation_law_direct(p, "exact")
        rows.append(Check("conjugation_law", worst, 0.0, max(err, 1e-12), params={"p": p}))
    res.add("conjugation_law", rows)
    return res


def _admissible_triples(cfg: RunConfig) -> list[cs.TripleModulus]:
    pool = primes_in(5, cfg.qmax)
    return cs.sample_triples(cfg.qmax, cfg.triples, seed=cfg.seed, primes=pool)


def closed_form_checks(qmax: int, seed: int = 0, per_q: int = 2, plus_sign: bool = False) -> tuple[list[Check], list[Check]]:
    """A(n) against its two closed forms for every prime q1 <= qmax."""
    rng = random.Random(seed)
    div_rows, laurent_rows = [], []
    for q1 in primes_in(3, qmax):
        others = [p for p in primes_in(5, qmax) if p != q1]
        for _ in range(per_q):
            q2, q2p = rng.choice(others), rng.choice(others)
            ell = rng.randrange(1, min(q2, q2p))
            while math.gcd(ell, q1 * q2 * q2p) != 1:
                ell = rng.randrange(1, min(q2, q2p))
            t = cs.TripleModulus(q1, q2, q2p, ell, q1 * rng.randrange(0, 4))
            A = cs.A_sum(t)
            div_rows.append(Check("A_divisible", A.value, cs.A_closed_form_divisible(t), 1e-9 * q1**3, A.err, t.key()))
            t = t.with_n(rng.choice([k for k in range(1, 3 * q1) if k % q1]))
            A = cs.A_sum(t)
            L = cs.A_closed_form_laurent(t, plus_sign=plus_sign)
            name = "A_laurent_plus" if plus_sign else "A_laurent"
            laurent_rows.append(Check(name, A.value, L.value, 1e-9 * q1**3, A.err + L.err, t.key()))
    return div_rows, laurent_rows


def suite_charsums(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("charsums")
    triples = _admissible_triples(cfg)
    res.measurements["triples"] = len(triples)
    fac = cs.factorization_checks(triples, cfg.rel_tol)
    res.add("factorization", [c for c in fac if c.name == "C=AB"])
    res.add("vanishing", [c for c in fac if c.name != "C=AB"])
    div, laurent = closed_form_checks(cfg.qmax, cfg.seed)
    _, laurent_plus = closed_form_checks(cfg.qmax, cfg.seed, plus_sign=True)
    res.add("closedform_divisible", div)
    res.add("closedform_laurent", laurent)
    res.add("closedform_laurent_plus", laurent_plus)
    rows = []
    for t in triples:
        if not t.diagonal and t.n % (t.q2 * t.q2p):
            B, Bc = cs.B_sum(t), cs.B_closed_form_offdiag(t)
            rows.append(Check("B_offdiag", B.value, Bc.value, 1e-9 * (t.q2 * t.q2p) ** 2, B.err + Bc.err, t.key()))
    res.add("closedform_B", rows)
    rows, viol = [], 0
    for t in [cs.TripleModulus(13, 5, 17, 1, 1), cs.TripleModulus(11, 7, 13, 2, 3), cs.TripleModulus(29, 31, 37, 5, 7)]:
        rep = cs.xi_substitution_check(t)
        rows.extend(rep.checks)
        viol += rep.coprimality_violations
    res.add("xi_chain", rows)
    res.flags["xi_coprimality"] = viol == 0
    bounds = []
    for regime in (1, 2, 3, 4):
        bounds += cs.corollary_bounds(cs.sample_triples(cfg.qmax, 20, seed=cfg.seed + regime, regime=regime))
    worst = {r: max(b.ratio for b in bounds if b.regime == r) for r in (1, 2, 3, 4)}
    res.measurements["corollary_max_ratio"] = {str(k): v for k, v in worst.items()}
    res.measurements["corollary_cases"] = {str(r): sum(b.regime == r for b in bounds) for r in (1, 2, 3, 4)}
    res.flags["corollary_within_10x"] = all(v <= 10 for v in worst.values())
    gs = cs.gcd_sensitivity(cfg.qmax)
    res.measurements["gcd_sensitivity"] = gs
    res.flags["gcd_sensitivity"] = all(row["match"] and row["exact"] for row in gs if row["kind"] != "cube_root")
    res.flags["gcd_bound_cube_root_case"] = all(row["match"] for row in gs if row["kind"] == "cube_root")
    return res


def newton_tuples(count: int, primes: tuple[int, ...], seed: int = 0) -> list[dict]:
    """Seeded (l, n, q2, q2') tuples whose coefficients are units modulo every listed prime."""
    rng = random.Random(seed)
    pool = [p for p in primes_in(5, 200) if p not in primes]
    out = []
    while len(out) < count:
        q2, q2p = rng.choice(pool), rng.choice(pool)
        ell = rng.randrange(1, min(q2, q2p))
        n = rng.randrange(1, 500)
        if any(v % p == 0 for p in primes for v in (ell, n)):
            continue
        t = {"ell": ell, "n": n, "q2": q2, "q2p": q2p}
        if t not in out:
            out.append(t)
    return out


def suite_newton(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("newton")
    f0 = nw.twist_laurent(1, 1, 5, 17, 13)
    P = nw.newton_polyhedron(f0)
    expect = {(1, 0, 0), (-1, 0, 0), (0, 0, 1), (0, 0, -1), (-1, -1, 0), (0, 1, -1)}
    res.flags["hull_vertices_exact"] = set(P.vertices) == expect
    res.measurements["hull"] = {"vertices": sorted(P.vertices), "dim": P.dim, "faces": len(P.faces)}
    viol = nw.face_dichotomy_violations(P)
    res.measurements["dichotomy_violations"] = [{"normal": fc.normal, "offset": fc.offset, "vertices": sorted(P.face_vertices(fc))} for fc in viol]
    tuples = newton_tuples(cfg.newton_tuples, cfg.newton_primes, cfg.seed)
    rows, ratio_max, degenerate = [], 0.0, []
    for t in tuples:
        for p in cfg.newton_primes:
            rep = nw.is_nondegenerate(None, p, t)
            f = nw.twist_laurent(t["ell"], t["n"], t["q2"], t["q2p"], p)
            ratio = nw.sqrt_cancellation_measure(f, p)
            ratio_max = max(ratio_max, ratio)
            rows.append(Check("nondegenerate", float(rep.nondegenerate), 1.0, 0.0, params={**t, "p": p}))
            for fr in rep.faces:
                if fr.degenerate:
                    degenerate.append({**t, "p": p, "face": fr.vertices, "witness": fr.witness})
    res.add("nondegenerate", rows)
    res.measurements["degenerate_faces"] = degenerate[:10]
    res.measurements["degenerate_cases"] = len(degenerate)
    res.measurements["sqrt_cancellation_max"] = ratio_max
    res.flags["sqrt_cancellation_le_12"] = ratio_max <= 12
    planted = nw.LaurentPolynomial.from_terms({(2, 0): 1, (1, 1): 2, (0, 2): 1})
    prep = nw.is_nondegenerate(planted, 11)
    res.flags["planted_degenerate_flagged"] = not prep.nondegenerate
    res.measurements["planted_witness"] = next(fr.witness for fr in prep.faces if fr.degenerate) if not prep.nondegenerate else None
    return res


ARCH_PARAMS = (
    arch.LanglandsParams((0, 0, 0)),
    arch.LanglandsParams((0.3, -0.15 + 0.4j, -0.15 - 0.4j)),
)


def contour_checks() -> list[Check]:
    rows = []
    for params in ARCH_PARAMS:
        for y in np.logspace(-1, 1, 10):
            y = float(y)
            ref = arch.V(y, params, arch.AFEConfig(sigma=3))
            for sigma in (2.0, 1.0, params.first_pole / 2):
                v = arch.V(y, params, arch.AFEConfig(sigma=sigma))
                rows.append(Check("contour_shift", v, ref, 1e-8, params={"y": y, "alpha": [str(a) for a in params.alpha], "sigma": sigma}))
    return rows


def small_y_exponent(params: arch.LanglandsParams, ys=None) -> float:
    ys = np.logspace(-5, -3, 9) if ys is None else ys
    dev = [abs(arch.V(float(y), params) - 1) for y in ys]
    slope, _ = np.polyfit(np.log(ys), np.log(dev), 1)
    return float(slope)


def suite_archimedean(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("archimedean")
    res.add("contour_shift", contour_checks())
    exps = {}
    for params in ARCH_PARAMS + (arch.LanglandsParams((0.4, -0.2, -0.2)),):
        exps[",".join(str(a) for a in params.alpha)] = small_y_exponent(params)
    res.measurements["small_y_exponent"] = exps
    res.flags["small_y_exponent_ge_0.09"] = exps[",".join(str(a) for a in ARCH_PARAMS[0].alpha)] >= 0.09
    v1000 = arch.V(1e3)
    res.measurements["V(1000)"] = v1000
    res.flags["V(1000)_le_1e-6"] = abs(v1000) <= 1e-6
    return res


def suite_lfun(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("lfun")
    form = lf.ToyGL3Form()
    rows, xind = [], []
    for q in cfg.afe_moduli:
        for chi in enumerate_characters(q, "primitive_even"):
            reps = [lf.afe_check(form, chi, X, tol=cfg.afe_tol) for X in cfg.afe_X]
            for r in reps:
                rows.append(Check("afe", r.rhs, r.lhs, cfg.afe_tol * abs(r.lhs), params={"q": q, "chi_index": chi.index, "X": r.X}))
            for i in range(len(reps)):
                for j in range(i + 1, len(reps)):
                    a, b = reps[i], reps[j]
                    xind.append(Check("afe_x_independence", a.rhs, b.rhs, 1e-6 * abs(a.rhs), params={"q": q, "chi_index": chi.index, "X1": a.X, "X2": b.X}))
    res.add("afe", rows)
    res.add("afe_x_independence", xind)
    rows = []
    for q in (5, 13):
        for chi in enumerate_characters(q, "primitive_even"):
            for s in (0.5, 0.5 + 0.5j):
                rows.append(Check("functional_equation", lf.functional_equation_residual(s, chi), 0.0, 1e-8, params={"q": q, "chi_index": chi.index, "s": s}))
            rows.append(Check("two_routes", lf.dirichlet_L_afe1(chi), lf.dirichlet_L(0.5, chi), 1e-8, params={"q": q, "chi_index": chi.index}))
    res.add("degree_one", rows)
    rows = []
    for q in [q for q in range(3, 101, 2) if all(q % (p * p) for p in (3, 5, 7))]:
        for chi in enumerate_characters(q, "primitive"):
            rows.append(Check("epsilon_unit", abs(lf.epsilon_factor(chi).value), 1.0, 1e-9, params={"q": q, "chi_index": chi.index}))
    res.add("epsilon_unit", rows)
    ratios = lf.d3_average_ratios()
    res.measurements["d3_square_average"] = {str(k): v for k, v in ratios.items()}
    res.measurements["d3_multiplicativity_violations"] = lf.multiplicativity_violations(10**4)
    res.flags["d3_multiplicative"] = res.measurements["d3_multiplicativity_violations"] == 0
    return res


def suite_moment(cfg: RunConfig) -> SuiteResult:
    res = SuiteResult("moment")
    fam = mo.build_family(cfg.Q1, cfg.Q2)
    res.measurements["family"] = {"Q1": fam.Q1, "Q2": fam.Q2, "members": [list(m) for m in fam.members], "Y": fam.Y}
    rows, reports = [], {}
    for ell in cfg.ells:
        r = mo.moment_pipeline(fam, ell=ell)
        scale = abs(r.T_direct)
        rows.append(Check("T=F+S", r.T_decomposed, r.T_direct, cfg.moment_tol * scale, params={"ell": ell, "X": r.X}))
        rows.append(Check("main_term", r.main_term, lf.divisor_d3(ell)[ell] / math.sqrt(ell) * fam.Y, 0.0, params={"ell": ell}))
        reports[str(ell)] = {
            "T_direct": r.T_direct,
            "F": r.F_term,
            "S": r.S_term,
            "main_term": r.main_term,
            "residual_over_Y": abs(r.residual) / r.Y,
            "F_routes_gap": r.F_routes_gap,
            "S_routes_gap": r.S_routes_gap,
            "leading_unsigned": r.leading,
            "diagonal_signed": r.diagonal_signed,
            "E_ratio": r.E_diagnostic / r.E_trivial,
        }
        rows.append(Check("F_routes", r.F_routes_gap, 0.0, cfg.moment_tol, params={"ell": ell}))
        rows.append(Check("S_routes", r.S_routes_gap, 0.0, cfg.moment_tol, params={"ell": ell}))
    res.add("pipeline", rows)
    res.measurements["reports"] = reports
    ladder, monotone = mo.residual_ladder(ell=1)
    res.measurements["ladder"] = [{"Q1": r.Q1, "Q2": r.Q2, "members": r.members, "Y": r.Y, "ratio": r.ratio} for r in ladder]
    res.flags["ladder_decreasing"] = monotone
    return res


RUNNERS = {
    "characters": suite_characters,
    "expsums": suite_expsums,
    "charsums": suite_charsums,
    "newton": suite_newton,
    "archimedean": suite_archimedean,
    "lfun": suite_lfun,
    "moment": suite_moment,
}


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CHARSUMLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_suites(cfg: RunConfig) -> dict[str, SuiteResult]:
    """Run the selected suites; results are keyed and ordered by suite name."""
    names = [s for s in SUITES if s in cfg.suites]
    unknown = set(cfg.suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    threads = min(thread_count(), max(1, len(names)))
    if threads == 1:
        results = [RUNNERS[n](cfg) for n in names]
    else:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda n: RUNNERS[n](cfg), names))
    return dict(zip(names, results))


