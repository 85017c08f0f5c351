"""Command-line interface: one subcommand per computation, JSON on stdout.

Exit status is 0 on success, 1 on a domain error (or a failed selfcheck),
2 on a usage error. Every report embeds the resolved configuration.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .arith.chebotarev import PREDICATES, chebotarev_density, splitting_type, theta_estimate
from .arith.polys import FactoredBinaryForm, ParseError, parse_polynomial
from .constants import VARIANTS, ThresholdSpec, beta_sieve_constants, solve_threshold
from .lod import lod_sum_experiment
from .permdens import GroupSpec, T_exact, excluded_report, h_fixed_point_free, stirling_first, T_of_group
from .selfcheck import TAMPER_KEYS, degree_bound, run_selfcheck
from .sifter import SiftingSetSpec, SiftProblem, hasse_example_report, sift_count
from .specfun import CertifiedValue, DomainError


class UsageError(Exception):
    pass


def _cv(c: CertifiedValue) -> dict:
    return {"value": c.value, "error_radius": c.error_radius}


def _frac(q: Fraction) -> dict:
    return {"fraction": f"{q.numerator}/{q.denominator}", "value": float(q)}


def _int_list(text: str) -> list:
    try:
        return [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from exc


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read problem file {path!r}: {exc}") from exc


# --- subcommands ------------------------------------------------------------------

def cmd_constants(a) -> dict:
    c = beta_sieve_constants(a.kappa, tol=a.tol)
    return {k: _cv(getattr(c, k)) for k in ("p", "q", "A", "B", "r")} | {"kappa": a.kappa}


def cmd_threshold(a) -> dict:
    coeff = Fraction(a.coefficient) if a.coefficient is not None else None
    spec = ThresholdSpec(a.variant, coeff)
    root = solve_threshold(spec, tol=a.tol)
    out = {"variant": a.variant, "coefficient": str(spec.coefficient),
           "bracket": list(spec.bracket), "root": root.value, "error_radius": root.error_radius}
    if a.variant == "biquadratic-corollary" and coeff is None:
        out["degree_bound"] = _cv(root / CertifiedValue.exact(3.0))
    return out


def cmd_tn(a) -> dict:
    return {"n": a.n, "T": _frac(T_exact(a.n))}


def cmd_excluded(a) -> dict:
    if a.threshold is not None:
        thr = Fraction(a.threshold)
    elif a.threshold_from == "biquadratic-corollary":
        thr = degree_bound()
    else:
        raise UsageError("give --threshold or --threshold-from biquadratic-corollary")
    return excluded_report(thr, a.nmax).to_dict()


def cmd_group(a) -> dict:
    if a.variant == "symmetric":
        G = GroupSpec.symmetric(a.degree)
    elif a.variant == "alternating":
        G = GroupSpec.alternating(a.degree)
    else:
        G = GroupSpec.agl1(a.degree)
    return {"variant": a.variant, "degree": a.degree, "order": G.order(),
            "T": _frac(T_of_group(G)), "h_fixed_point_free": _frac(h_fixed_point_free(G))}


def cmd_stirling(a) -> dict:
    return {"m": a.m, "i": a.i, "unsigned_stirling_first": stirling_first(a.m, a.i)}


def cmd_split(a) -> dict:
    g = parse_polynomial(a.poly)
    return {"poly": list(g), "p": a.p, "splitting_type": list(splitting_type(g, a.p).parts)}


def cmd_density(a) -> dict:
    g = parse_polynomial(a.poly)
    return {"poly": list(g), "predicate": a.predicate,
            "density": chebotarev_density(g, a.predicate, a.X).to_dict()}


def _sifting_from_args(a) -> SiftingSetSpec:
    classes = []
    for item in (a.classes or "").split(","):
        if item.strip():
            try:
                t, q = item.split(":")
                classes.append((int(t), int(q)))
            except ValueError as exc:
                raise UsageError(f"class {item!r} should look like t:q") from exc
    excluded = frozenset(_int_list(a.excluded or ""))
    if classes:
        return SiftingSetSpec("congruence-union", classes=tuple(classes), excluded=excluded)
    if a.split_poly:
        return SiftingSetSpec("split-condition", poly=parse_polynomial(a.split_poly),
                              predicate=a.predicate, excluded=excluded)
    raise UsageError("theta needs --classes or --split-poly")


def cmd_theta(a) -> dict:
    form = FactoredBinaryForm.parse(a.form)
    spec = _sifting_from_args(a)
    rep = theta_estimate(form, spec.mask, a.X, S=sorted(spec.excluded))
    return {"form": str(form), "sifting": spec.to_dict(), "theta": rep.to_dict()}


def cmd_sift(a) -> dict:
    problem = SiftProblem.from_dict(_load_json(a.problem))
    res = sift_count(problem, witness_cap=a.witness_cap, workers=a.threads)
    return {"problem": problem.to_dict(), "result": res.to_dict()}


def cmd_example(a) -> dict:
    rep = hasse_example_report(a.preset, N=a.N, X=a.X, q=a.q, r=a.r, f=a.f)
    return rep.to_dict()


def cmd_lod(a):
    params = {"g1": a.g1, "g2": a.g2, "N": _int_list(a.N), "e1": a.e1, "e2": a.e2,
              "delta": a.delta, "a0": a.a0, "b0": a.b0, "mode": a.mode}
    if a.problem:
        params.update(_load_json(a.problem))
    rep = lod_sum_experiment(params["g1"], params["g2"], params["N"], float(params["e1"]),
                             float(params["e2"]), int(params["delta"]), int(params["a0"]),
                             int(params["b0"]), params["mode"], workers=a.threads,
                             keep_rows=a.format == "csv")
    if a.format == "csv":
        return rep.to_csv()
    return rep.to_dict()


COMMANDS = {
    "constants": cmd_constants, "threshold": cmd_threshold, "tn": cmd_tn,
    "excluded": cmd_excluded, "group": cmd_group, "stirling": cmd_stirling,
    "split": cmd_split, "density": cmd_density, "theta": cmd_theta, "sift": cmd_sift,
    "example": cmd_example, "lod": cmd_lod,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="sievekit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"sievekit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="beta-sieve constants at kappa")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("threshold", parents=[common], help="solve a threshold equation")
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--coefficient", help="rational coefficient, e.g. 2/3")

    p = sub.add_parser("tn", parents=[common], help="exact T(n) for the symmetric group")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("excluded", parents=[common], help="degrees with T(n) above a threshold")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--threshold", help="rational threshold, e.g. 0.14071")
    g.add_argument("--threshold-from", choices=("biquadratic-corollary",))
    p.add_argument("--nmax", type=int, default=200)

    p = sub.add_parser("group", parents=[common], help="T(G) and h(G) for a permutation group")
    p.add_argument("--variant", choices=("symmetric", "alternating", "agl1"), required=True)
    p.add_argument("--degree", type=int, required=True)

    p = sub.add_parser("stirling", parents=[common], help="unsigned Stirling number of the first kind")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--i", type=int, required=True)

    p = sub.add_parser("split", parents=[common], help="splitting type of a polynomial mod p")
    p.add_argument("--poly", required=True)
    p.add_argument("--p", type=int, required=True)

    p = sub.add_parser("density", parents=[common], help="empirical density of a splitting predicate")
    p.add_argument("--poly", required=True)
    p.add_argument("--predicate", choices=sorted(PREDICATES), required=True)
    p.add_argument("--X", type=int, default=10 ** 6)

    p = sub.add_parser("theta", parents=[common], help="alpha and theta_i for a form and sifting set")
    p.add_argument("--form", required=True)
    p.add_argument("--classes", help="congruence classes t:q, comma separated")
    p.add_argument("--split-poly", help="polynomial for a split-condition sifting set")
    p.add_argument("--predicate", choices=sorted(PREDICATES), default="non-coprime")
    p.add_argument("--excluded", help="excluded primes, comma separated")
    p.add_argument("--X", type=int, default=10 ** 6)

    p = sub.add_parser("sift", parents=[common], help="exact sifting count from a JSON problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--witness-cap", type=int, default=100)

    p = sub.add_parser("example", parents=[common], help="worked Hasse-principle examples")
    p.add_argument("--preset", choices=("iskovskikh", "irving"), required=True)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--X", type=int, default=10 ** 6)
    p.add_argument("--q", type=int, default=7)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--f", default="x^3-3y^3")

    p = sub.add_parser("lod", parents=[common], help="level-of-distribution remainder sums")
    p.add_argument("--g1", default="x^2+y^2")
    p.add_argument("--g2", default="y*(x^2+y^2)")
    p.add_argument("--N", default="500,1000,2000,4000")
    p.add_argument("--e1", type=float, default=0.4)
    p.add_argument("--e2", type=float, default=0.4)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--a0", type=int, default=0)
    p.add_argument("--b0", type=int, default=0)
    p.add_argument("--mode", choices=("corollary", "linear"), default="corollary")
    p.add_argument("--problem", help="JSON file overriding the flags above")

    p = sub.add_parser("selfcheck", parents=[common], help="run the acceptance criteria")
    p.add_argument("--X", type=int, default=10 ** 6)
    p.add_argument("--only", help="criterion numbers, comma separated")
    p.add_argument("--tamper", action="append", default=[], metavar="KEY=DELTA",
                   help="test hook: shift a computed constant before comparison")
    return ap


def _config(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items())}


def _emit(obj, fmt: str) -> None:
    if isinstance(obj, str):
        sys.stdout.write(obj)
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2 if fmt == "text" else None))
        sys.stdout.write("\n")


def _selfcheck(a) -> int:
    tamper = {}
    for item in a.tamper:
        key, _, delta = item.partition("=")
        try:
            tamper[key] = float(delta)
        except ValueError as exc:
            raise UsageError(f"--tamper expects KEY=DELTA, got {item!r}") from exc
        if key not in TAMPER_KEYS:
            raise UsageError(f"unknown tamper key {key!r}; choose from {', '.join(TAMPER_KEYS)}")
    only = _int_list(a.only) if a.only else None
    if a.format == "text":
        report = run_selfcheck(a.X, a.seed, tamper, only,
                               on_result=lambda c: print(c.line(), flush=True))
        print("ALL PASS" if report["passed"] else "SOME CRITERIA FAILED")
    else:
        report = run_selfcheck(a.X, a.seed, tamper, only)
        _emit(report, a.format)
    return 0 if report["passed"] else 1


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if a.command == "selfcheck":
            return _selfcheck(a)
        result = COMMANDS[a.command](a)
        if isinstance(result, str):
            _emit(result, a.format)
        else:
            _emit({"config": _config(a), "result": result}, a.format)
        return 0
    except (UsageError, ParseError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (DomainError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
