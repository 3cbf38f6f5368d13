"""Command-line entry point: ``charsumlab <command> ...`` or ``python3 -m charsumlab.cli``.

Exit status is 0 when every check passes, 1 when some check fails and 2 for
usage or configuration errors.  JSON goes to ``--out`` when given, otherwise
to stdout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import archimedean as arch
from . import charsums as cs
from . import expsums as es
from . import lfunctions as lf
from . import moment as mo
from . import newton as nw
from .characters import enumerate_characters
from .errors import CharsumError
from .report import Check, dumps, rows_to_csv
from .residue import primes_in
from .suites import SUITES, RunConfig, closed_form_checks, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(payload: dict, out: str | None):
    text = dumps(payload)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_rows(rows: list[dict], fmt: str, out: str | None, extra: dict | None = None):
    if fmt == "csv":
        text = rows_to_csv(rows)
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        _emit({**(extra or {}), "rows": rows}, out)


def _status(checks) -> int:
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# ---------------------------------------------------------------------------
# expsums


def cmd_expsums_verify(args) -> int:
    checks: list[Check] = []
    if args.identity == "identity2":
        for q in primes_in(3, args.qmax):
            checks += es.cubed_gauss_sweep(q, es.identity2_pairs(q, args.qmax, seed=args.seed))
    elif args.identity == "gauss_splitting":
        mods = [q for q in (5, 13, 17, 29) if q <= args.qmax]
        for q1 in mods:
            for q2 in mods:
                if q1 != q2:
                    for c1 in enumerate_characters(q1, "primitive"):
                        for c2 in enumerate_characters(q2, "primitive"):
                            checks.append(es.gauss_splitting_check(c1, c2))
    else:
        for p in primes_in(3, args.qmax):
            worst, err = es.conjugation_law_direct(p, "exact")
            checks.append(Check("conjugation_law", worst, 0.0, max(err, 1e-12), params={"p": p}))
    failed = sum(not c.passed for c in checks)
    _emit({"identity": args.identity, "cases": len(checks), "failed": failed, "rows": [c.row() for c in checks]}, args.out)
    return _status(checks)


def cmd_expsums_deligne(args) -> int:
    rows = es.deligne_measure(args.pmax)
    data = [{"p": r.p, "max_ratio": r.max_ratio, "argmax_u": r.argmax_u, "min_ratio": r.min_ratio, "conj_law_max_err": r.conj_law_max_err} for r in rows]
    overall = max(r.max_ratio for r in rows)
    _emit_rows(data, args.report, args.out, {"pmax": args.pmax, "max_ratio": overall})
    return EXIT_OK if 1.0 <= overall <= 3.0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# charsums


def cmd_charsums_verify(args) -> int:
    checks: list[Check] = []
    extra: dict = {}
    if args.suite in ("factorization", "vanishing"):
        triples = cs.sample_triples(args.qmax, args.triples, seed=args.seed, primes=primes_in(5, args.qmax))
        name = {"factorization": ("C=AB",), "vanishing": ("B(0)=0", "C(0)=0")}[args.suite]
        checks = [c for c in cs.factorization_checks(triples, args.rel_tol) if c.name in name]
    elif args.suite == "closedforms":
        div, laurent = closed_form_checks(args.qmax, args.seed)
        checks = div + laurent
    else:
        rows = []
        for regime in (1, 2, 3, 4):
            rows += cs.corollary_bounds(cs.sample_triples(args.qmax, 20, seed=args.seed + regime, regime=regime))
        data = [{**r.triple, "regime": r.regime, "value": r.value, "envelope": r.envelope, "ratio": r.ratio} for r in rows]
        worst = max(r.ratio for r in rows)
        _emit({"suite": "bounds", "max_ratio": worst, "rows": data}, args.out)
        return EXIT_OK if worst <= 10 else EXIT_FAIL
    extra.update({"suite": args.suite, "cases": len(checks), "failed": sum(not c.passed for c in checks)})
    _emit({**extra, "rows": [c.row() for c in checks]}, args.out)
    return _status(checks)


def cmd_charsums_eval(args) -> int:
    t = cs.TripleModulus(args.q1, args.q2, args.q2p, args.ell, args.n)
    A = cs.A_sum(t, oracle=args.oracle)
    out = {"triple": t.key(), "A": A.value, "A_err": A.err}
    if t.q2 * t.q2p <= cs.B_MAX:
        B = cs.B_sum(t)
        out.update({"B": B.value, "B_err": B.err, "AB": A.value * B.value})
    if t.q1 * t.q2 * t.q2p <= cs.C_MAX:
        C = cs.C_sum(t)
        out.update({"C": C.value, "C_err": C.err})
    if t.n % t.q1 == 0:
        out["A_closed_form"] = cs.A_closed_form_divisible(t)
    else:
        out["A_closed_form"] = cs.A_closed_form_laurent(t).value
    _emit(out, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# newton


def _face_rows(rep: nw.NondegeneracyReport) -> list[dict]:
    return [{"dim": fr.dim, "vertices": fr.vertices, "degenerate": fr.degenerate, "witness": fr.witness} for fr in rep.faces]


def cmd_newton_check(args) -> int:
    if not args.twist_laurent:
        raise ConfigError("newton check needs --twist-laurent (or use `newton hull --poly FILE --p P`)")
    params = {"ell": args.ell, "n": args.n, "q2": args.q2, "q2p": args.q2p}
    rows, ok = [], True
    for p in args.primes:
        rep = nw.is_nondegenerate(None, p, params)
        f = nw.twist_laurent(args.ell, args.n, args.q2, args.q2p, p)
        ok &= rep.nondegenerate
        rows.append({"p": p, "nondegenerate": rep.nondegenerate, "sqrt_ratio": nw.sqrt_cancellation_measure(f, p), "faces": _face_rows(rep)})
    P = nw.newton_polyhedron(nw.twist_laurent(args.ell, args.n, args.q2, args.q2p, args.primes[0]))
    _emit({"params": params, "vertices": sorted(P.vertices), "primes": rows}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_newton_hull(args) -> int:
    try:
        f = nw.LaurentPolynomial.from_json(Path(args.poly).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read polynomial file {args.poly}: {exc}")
    P = nw.newton_polyhedron(f)
    out = {
        "vertices": sorted(P.vertices),
        "dim": P.dim,
        "faces_off_origin": [sorted(P.face_vertices(fc)) for fc in nw.faces_off_origin(P)],
    }
    status = EXIT_OK
    if args.p:
        rep = nw.is_nondegenerate(f, args.p)
        out["p"] = args.p
        out["nondegenerate"] = rep.nondegenerate
        out["faces"] = _face_rows(rep)
        status = EXIT_OK if rep.nondegenerate else EXIT_FAIL
    _emit(out, args.out)
    return status


# ---------------------------------------------------------------------------
# archimedean, lfun, moment


def cmd_archimedean_v(args) -> int:
    params = arch.LanglandsParams.parse(args.alpha)
    q = arch.V_detail(args.y, params, arch.AFEConfig(sigma=args.sigma))
    value = q.value.real if params.self_conjugate else q.value
    _emit({"y": args.y, "alpha": [str(a) for a in params.alpha], "V": value, "err": q.err, "sigma": q.sigma, "h": q.h, "T": q.T, "bound": float(arch.V_bound([args.y], params)[0])}, args.out)
    return EXIT_OK


def cmd_lfun_afe(args) -> int:
    form = lf.ToyGL3Form()
    reps = [lf.afe_check(form, chi, args.X, tol=args.tol) for chi in enumerate_characters(args.q, "primitive_even")]
    _emit_rows([r.row() for r in reps], args.report, args.out, {"q": args.q, "X": args.X})
    return EXIT_OK if all(r.passed for r in reps) else EXIT_FAIL


def cmd_lfun_central(args) -> int:
    form = lf.ToyGL3Form()
    rows = []
    for chi in enumerate_characters(args.q, "primitive_even"):
        L = lf.dirichlet_L(0.5, chi)
        rows.append({"q": args.q, "chi_index": chi.index, "L": L, "L_cubed": L**3, "epsilon": lf.epsilon_factor(chi).value, "L_afe1": lf.dirichlet_L_afe1(chi)})
    _emit({"q": args.q, "form": "d3", "rows": rows}, args.out)
    return EXIT_OK


def _moment_payload(r: mo.MomentReport) -> dict:
    return {f.name: getattr(r, f.name) for f in fields(r)} | {"passed": r.passed}


def cmd_moment_run(args) -> int:
    fam = mo.build_family(args.Q1, args.Q2)
    r = mo.moment_pipeline(fam, ell=args.ell, X=args.X, any_ell=args.any_ell)
    _emit({"family": {"Q1": fam.Q1, "Q2": fam.Q2, "members": [list(m) for m in fam.members]}, **_moment_payload(r)}, args.out)
    return EXIT_OK if r.passed else EXIT_FAIL


def cmd_moment_trend(args) -> int:
    if not 2 <= args.ladder <= len(mo.DEFAULT_LADDER):
        raise ConfigError(f"--ladder must lie in 2..{len(mo.DEFAULT_LADDER)}")
    rows, monotone = mo.residual_ladder(mo.DEFAULT_LADDER[: args.ladder], ell=args.ell)
    out = {"ell": args.ell, "decreasing": monotone, "rows": rows}
    if args.s_trend:
        srows, smono = mo.s_ratio_trend(mo.S_TREND_LADDER[: args.ladder], ell=args.ell)
        out["S_trend"] = {"rows": srows, "decreasing": smono}
    _emit(out, args.out)
    return EXIT_OK if monotone else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify


def read_config_file(path: str) -> dict[str, str]:
    """Flat ``key=value`` lines; blank lines and ``#`` comments are ignored."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    out = {}
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{k}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    known = RunConfig.field_types()
    overrides: dict[str, str] = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    values = {}
    for key, text in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = cfg.coerce(key, text)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}")
    for key in ("qmax", "pmax", "seed", "out", "csv_dir"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.all:
        values["suites"] = SUITES
    elif args.suite:
        names = [s for s in args.suite if s != "none"]
        bad = set(names) - set(SUITES)
        if bad:
            raise ConfigError(f"unknown suite(s): {', '.join(sorted(bad))}")
        values["suites"] = tuple(names)
    elif "suites" not in values:
        raise ConfigError("choose --all or --suite NAME [NAME ...]")
    cfg = replace(cfg, **values)
    if cfg.qmax < 7 or cfg.pmax < 7:
        raise ConfigError("qmax and pmax must be at least 7")
    return cfg


def cmd_verify(args) -> int:
    cfg = build_config(args)
    results = run_suites(cfg)
    summary = {"config": {k: v for k, v in vars(cfg).items() if k not in ("out", "csv_dir")}, "suites": {n: r.summary() for n, r in results.items()}}
    summary["passed"] = all(r.passed for r in results.values())
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, r in results.items():
            (out / f"{name}.json").write_text(dumps(r.payload()))
        (out / "summary.json").write_text(dumps(summary))
    if cfg.csv_dir:
        d = Path(cfg.csv_dir)
        d.mkdir(parents=True, exist_ok=True)
        for name, r in results.items():
            for group, checks in sorted(r.groups.items()):
                (d / f"{name}_{group}.csv").write_text(rows_to_csv([c.row() for c in checks]))
    for name, r in results.items():
        flags = [k for k, v in r.flags.items() if not v]
        groups = [g for g in r.groups if not r.group_passed(g)]
        detail = "" if r.passed else f"  failing: {', '.join(sorted(groups + flags))}"
        print(f"{'PASS' if r.passed else 'FAIL'}  {name}{detail}", file=sys.stderr)
    if not cfg.out:
        sys.stdout.write(dumps(summary))
    return EXIT_OK if summary["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charsumlab", description="Character sums, exponential sums and a twisted first-moment experiment.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expsums", help="Gauss, Kloosterman and hyper-Kloosterman sums")
    s = p.add_subparsers(dest="action", required=True)
    v = s.add_parser("verify")
    v.add_argument("--identity", choices=("identity2", "gauss_splitting", "conjugation"), default="identity2")
    v.add_argument("--qmax", type=int, default=60)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_expsums_verify)
    d = s.add_parser("deligne")
    d.add_argument("--pmax", type=int, default=300)
    d.add_argument("--report", choices=("json", "csv"), default="json")
    d.add_argument("--out")
    d.set_defaults(func=cmd_expsums_deligne)

    p = sub.add_parser("charsums", help="the three-modulus sums A, B, C")
    s = p.add_subparsers(dest="action", required=True)
    v = s.add_parser("verify")
    v.add_argument("--suite", choices=("factorization", "vanishing", "closedforms", "bounds"), required=True)
    v.add_argument("--qmax", type=int, default=60)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--triples", type=int, default=200)
    v.add_argument("--rel-tol", type=float, default=1e-6)
    v.add_argument("--out")
    v.set_defaults(func=cmd_charsums_verify)
    e = s.add_parser("eval")
    for name in ("--q1", "--q2", "--q2p"):
        e.add_argument(name, type=int, required=True)
    e.add_argument("--ell", type=int, default=1)
    e.add_argument("--n", type=int, default=0)
    e.add_argument("--oracle", action="store_true", help="evaluate A by the direct five-fold sum")
    e.add_argument("--out")
    e.set_defaults(func=cmd_charsums_eval)

    p = sub.add_parser("newton", help="Newton polyhedra and non-degeneracy")
    s = p.add_subparsers(dest="action", required=True)
    c = s.add_parser("check")
    c.add_argument("--twist-laurent", action="store_true", help="use the three-variable Laurent polynomial from the A-sum")
    c.add_argument("--ell", type=int, default=1)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--q2", type=int, default=5)
    c.add_argument("--q2p", type=int, default=17)
    c.add_argument("--primes", type=_int_list, default=[7, 11, 13])
    c.add_argument("--out")
    c.set_defaults(func=cmd_newton_check)
    h = s.add_parser("hull")
    h.add_argument("--poly", required=True, help="JSON list of {exponents: [...], coeff: int}")
    h.add_argument("--p", type=int, help="also test non-degeneracy modulo this prime")
    h.add_argument("--out")
    h.set_defaults(func=cmd_newton_hull)

    p = sub.add_parser("archimedean", help="the cutoff function V(y)")
    s = p.add_subparsers(dest="action", required=True)
    v = s.add_parser("v")
    v.add_argument("--y", type=float, required=True)
    v.add_argument("--alpha", default="0,0,0")
    v.add_argument("--sigma", type=float)
    v.add_argument("--out")
    v.set_defaults(func=cmd_archimedean_v)

    p = sub.add_parser("lfun", help="Dirichlet L-values and the approximate functional equation")
    s = p.add_subparsers(dest="action", required=True)
    a = s.add_parser("afe")
    a.add_argument("--q", type=int, required=True)
    a.add_argument("--X", type=float, default=1.0)
    a.add_argument("--tol", type=float, default=1e-4)
    a.add_argument("--report", choices=("json", "csv"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_lfun_afe)
    c = s.add_parser("central")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_lfun_central)

    p = sub.add_parser("moment", help="the twisted first moment over a two-prime family")
    s = p.add_subparsers(dest="action", required=True)
    r = s.add_parser("run")
    r.add_argument("--Q1", type=int, default=10)
    r.add_argument("--Q2", type=int, default=40)
    r.add_argument("--ell", type=int, default=1)
    r.add_argument("--X", type=float, default=1.0)
    r.add_argument("--any-ell", action="store_true", help="allow twists that are not prime powers")
    r.add_argument("--out")
    r.set_defaults(func=cmd_moment_run)
    t = s.add_parser("trend")
    t.add_argument("--ladder", type=int, default=3)
    t.add_argument("--ell", type=int, default=1)
    t.add_argument("--s-trend", action="store_true", help="also report |S| / main term with X = Q^(-1/2)")
    t.add_argument("--out")
    t.set_defaults(func=cmd_moment_trend)

    p = sub.add_parser("verify", help="run verification suites")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--suite", nargs="+", metavar="NAME", help=f"any of {', '.join(SUITES)}, or none")
    p.add_argument("--qmax", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for per-suite JSON reports")
    p.add_argument("--csv-dir", dest="csv_dir")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        parser.error(str(exc))
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
    except CharsumError as exc:
        print(f"charsumlab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
