"""Acceptance criteria as functions, shared by the CLI and the test-suite.

Each criterion returns a ``Criterion`` with measured and expected values.
Reports contain no timings so that repeated runs are byte-identical.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from sympy import divisors, factorint, primerange

from .arith.chebotarev import chebotarev_density, theta_estimate
from .arith.counting import psi_k, rho_exhaustive, rho_i_of_p
from .arith.polys import FactoredBinaryForm
from .constants import beta_sieve_constants, solve_threshold_cached
from .lod import lod_sum_experiment
from .permdens import (
    GroupSpec,
    T_exact,
    T_of_group,
    cycle_type,
    excluded_report,
    h_fixed_point_free,
)
from .sifter import (
    CongruenceClass,
    Region,
    SiftingSetSpec,
    SiftProblem,
    iskovskikh_problem,
    raw_count,
    sift_count,
)
from .specfun import CertifiedValue, gamma

THRESHOLD_TOL = 1e-4
EXPECTED_THRESHOLDS = {
    "quadratic-general": 0.39000,
    "cubic": 0.32380,
    "biquadratic-corollary": 0.42214,
}
EXPECTED_DEGREE_BOUND = 0.14071
EXCLUDED_LIST = [2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 14, 15, 16, 18, 20, 22, 24, 26, 28, 30,
                 36, 42, 48]
COUNTING_FORMS = (
    "x", "x^2+y^2", "x^2-2y^2", "x^2+xy+y^2", "x^3-2y^3", "x^3-3y^3",
    "2x^2+3xy-5y^2", "x^3+x^2y-2xy^2-y^3", "x^4+y^4", "3x^2-7y^2",
)
LOD_SLOPE_MAX = 1.9
SIFT_NS = (10 ** 3, 10 ** 4, 10 ** 5)


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "measured": self.measured, "expected": self.expected}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} [{self.number}] {self.name}: measured "
                f"{json.dumps(self.measured, sort_keys=True)} expected "
                f"{json.dumps(self.expected, sort_keys=True)}")


def _cv(c: CertifiedValue) -> dict:
    return {"value": c.value, "error_radius": c.error_radius}


TAMPER_KEYS = ("quadratic-general", "biquadratic-corollary", "cubic", "constants.A0")


def _tampered(x: CertifiedValue, key: str, tamper: dict) -> CertifiedValue:
    return x + CertifiedValue.exact(tamper[key]) if key in tamper else x


# --- 1 & 2 ---------------------------------------------------------------------

def degree_bound(tamper: Optional[dict] = None) -> CertifiedValue:
    """The biquadratic threshold divided by 3, the bound fed into the excluded list."""
    root = _tampered(solve_threshold_cached("biquadratic-corollary"),
                     "biquadratic-corollary", tamper or {})
    return root / CertifiedValue.exact(3.0)


def criterion_thresholds(tamper: Optional[dict] = None) -> Criterion:
    tamper = tamper or {}
    measured, ok = {}, True
    for variant, want in EXPECTED_THRESHOLDS.items():
        root = _tampered(solve_threshold_cached(variant), variant, tamper)
        measured[variant] = _cv(root)
        ok &= abs(root.value - want) <= THRESHOLD_TOL
    bound = degree_bound(tamper)
    measured["degree-bound"] = _cv(bound)
    ok &= abs(bound.value - EXPECTED_DEGREE_BOUND) <= THRESHOLD_TOL
    expected = dict(EXPECTED_THRESHOLDS, **{"degree-bound": EXPECTED_DEGREE_BOUND,
                                             "tolerance": THRESHOLD_TOL})
    return Criterion(1, "threshold reproduction", bool(ok), measured, expected)


def criterion_excluded(tamper: Optional[dict] = None, n_max: int = 200) -> Criterion:
    rep = excluded_report(degree_bound(tamper), n_max)
    ok = rep.degrees == EXCLUDED_LIST and not rep.boundary
    return Criterion(2, "excluded degree list", ok,
                     {"excluded": rep.degrees, "boundary": rep.boundary, "n_max": n_max},
                     {"excluded": EXCLUDED_LIST})


# --- 3 ---------------------------------------------------------------------------

def criterion_constants(seed: int = 0, samples: int = 20, tamper: Optional[dict] = None) -> Criterion:
    tamper = tamper or {}
    c0 = beta_sieve_constants(0.0)
    zero = {k: getattr(c0, k).value for k in ("p", "q", "A", "B")}
    if "constants.A0" in tamper:
        zero["A"] += tamper["constants.A0"]
    ok = all(abs(v - 1) <= 1e-8 for v in zero.values())
    c1 = beta_sieve_constants(0.001)
    near = {"A": c1.A.value, "B": c1.B.value}
    ok &= all(abs(v - 1) <= 0.02 for v in near.values())
    rng = random.Random(seed)
    worst = 0.0
    kappas = sorted(round(rng.uniform(0.0, 0.4), 6) or 0.4 for _ in range(samples))
    for k in kappas:
        c = beta_sieve_constants(k, tol=1e-8)
        lhs = (c.B / c.A) * c.q
        worst = max(worst, abs(lhs.value - gamma(1 - k).value))
    ok &= worst <= 1e-6
    return Criterion(3, "constants sanity", bool(ok),
                     {"at_zero": zero, "at_0.001": near, "identity_max_deviation": worst,
                      "kappas": kappas},
                     {"at_zero": "1 within 1e-8", "at_0.001": "1 within 0.02",
                      "identity_max_deviation": "<= 1e-6"})


# --- 4 ---------------------------------------------------------------------------

def T_by_enumeration(n: int) -> Fraction:
    """Share of permutations of n points whose cycle lengths have gcd > 1."""
    hits = sum(cycle_type(p).gcd > 1 for p in itertools.permutations(range(n)))
    return Fraction(hits, math.factorial(n))


def criterion_permutations(n_max: int = 9) -> Criterion:
    mismatches = []
    for n in range(1, n_max + 1):
        t = T_exact(n)
        if t != T_by_enumeration(n) or t != T_of_group(GroupSpec.symmetric(n)):
            mismatches.append(n)
    agl = {}
    for q in (3, 5, 7, 11):
        G = GroupSpec.agl1(q)
        agl[str(q)] = [str(h_fixed_point_free(G)), str(T_of_group(G))]
    ok = not mismatches and all(v == [f"1/{q}"] * 2 for q, v in agl.items())
    return Criterion(4, "permutation oracle", ok,
                     {"mismatched_n": mismatches, "agl1_h_and_T": agl, "n_max": n_max},
                     {"mismatched_n": [], "agl1_h_and_T": "1/q for both"})


# --- 5 ---------------------------------------------------------------------------

def psi_equivalence_failures(d_max: int = 10 ** 4, k_max: int = 4) -> list:
    """(d, k, e) where p | psi_k(d)/e and p | d/gcd(d, e^k) disagree for some p | d."""
    bad = []
    for d in range(1, d_max + 1):
        primes = list(factorint(d))
        for k in range(1, k_max + 1):
            psi = psi_k(d, k)
            for e in divisors(psi):
                u, w = psi // e, d // math.gcd(d, e ** k)
                if any((u % p == 0) != (w % p == 0) for p in primes):
                    bad.append((d, k, e))
    return bad


def criterion_counting(p_max: int = 200, d_max: int = 10 ** 4) -> Criterion:
    mism = []
    for text in COUNTING_FORMS:
        form = FactoredBinaryForm.parse(text)
        f = form.factors[0] if len(form.factors) == 1 else form
        for p in primerange(2, p_max + 1):
            if rho_i_of_p(f, int(p)) != rho_exhaustive(f, int(p)):
                mism.append([text, int(p)])
    psi_bad = psi_equivalence_failures(d_max)
    return Criterion(5, "counting-function oracles", not mism and not psi_bad,
                     {"rho_mismatches": mism, "psi_failures": len(psi_bad),
                      "forms": len(COUNTING_FORMS), "p_max": p_max, "d_max": d_max},
                     {"rho_mismatches": [], "psi_failures": 0})


# --- 6 ---------------------------------------------------------------------------

def criterion_chebotarev(X: int = 10 ** 6) -> Criterion:
    cubic = chebotarev_density((1, 0, 0, -2), "no-root", X)
    quad = chebotarev_density((1, 0, -2), "inert", X)
    isk = iskovskikh_problem()
    th = theta_estimate(isk.form, isk.sifting.mask, X, S=sorted(isk.sifting.excluded))
    ok = cubic.contains(1 / 3) and quad.contains(0.5) and th.alpha.contains(0.5) \
        and all(t.contains(1.0) for t in th.theta)
    return Criterion(6, "Chebotarev empirics", bool(ok),
                     {"X": X, "x^3-2 no-root": cubic.to_dict(), "x^2-2 inert": quad.to_dict(),
                      "iskovskikh": th.to_dict()},
                     {"x^3-2 no-root": 1 / 3, "x^2-2 inert": 0.5, "alpha": 0.5,
                      "theta": [1.0, 1.0], "band": "3 sigma"})


# --- 7 ---------------------------------------------------------------------------

def random_empty_problem(rng: random.Random) -> SiftProblem:
    """A small sifting problem with empty P and a random form, region and class."""
    deg = rng.randint(1, 3)
    while True:
        coeffs = [rng.randint(-5, 5) for _ in range(deg + 1)]
        if any(coeffs):
            break
    terms = "+".join(f"({c})*x^{deg - i}*y^{i}" for i, c in enumerate(coeffs) if c)
    form = FactoredBinaryForm.parse(terms)
    ratio = Fraction(rng.randint(1, 12), rng.randint(1, 6))
    window = Fraction(rng.randint(1, 8), rng.randint(1, 8))
    delta = rng.randint(1, 6)
    return SiftProblem(form, Region(ratio, window, rng.randint(5, 60)),
                       CongruenceClass(delta, rng.randrange(delta), rng.randrange(delta)),
                       SiftingSetSpec.empty())


def criterion_sifting(seed: int = 0, Ns=SIFT_NS, random_problems: int = 20) -> Criterion:
    counts, cert = {}, None
    for N in Ns:
        res = sift_count(iskovskikh_problem(N))
        counts[str(N)] = res.count
        cert = res.certificate
    residue_ok = bool(cert) and any(c["residue"] == 3 and c["modulus"] == 4 for c in cert)
    rng = random.Random(seed)
    mism = []
    for i in range(random_problems):
        pb = random_empty_problem(rng)
        if sift_count(pb).count != raw_count(pb):
            mism.append(i)
    ok = all(v == 0 for v in counts.values()) and residue_ok and not mism
    return Criterion(7, "sifting ground truth", ok,
                     {"iskovskikh_counts": counts, "certificate": cert,
                      "random_mismatches": mism, "random_problems": random_problems},
                     {"iskovskikh_counts": 0, "certificate_residue": "3 mod 4",
                      "random_mismatches": []})


# --- 8 ---------------------------------------------------------------------------

def criterion_lod(N_grid=(500, 1000, 2000, 4000)) -> Criterion:
    rep = lod_sum_experiment("x^2+y^2", "y*(x^2+y^2)", list(N_grid), 0.4, 0.4, keep_rows=False)
    ok = rep.slope is not None and rep.slope < LOD_SLOPE_MAX
    return Criterion(8, "level-of-distribution smoke test", ok,
                     {"N": rep.N, "totals": rep.totals, "fitted_slope": rep.slope},
                     {"fitted_slope": f"< {LOD_SLOPE_MAX}"})


# --- 9 ---------------------------------------------------------------------------

def criterion_determinism(seed: int = 0) -> Criterion:
    """Re-run the exact criteria inside one process and compare serialized bytes."""
    def snapshot():
        parts = [criterion_excluded(), criterion_sifting(seed, Ns=(10 ** 3,)),
                 criterion_permutations(7)]
        return json.dumps([p.to_dict() for p in parts], sort_keys=True)
    first, second = snapshot(), snapshot()
    return Criterion(9, "determinism", first == second,
                     {"identical_reruns": first == second, "bytes": len(first)},
                     {"identical_reruns": True})


CRITERIA: dict = {
    1: lambda cfg: criterion_thresholds(cfg["tamper"]),
    2: lambda cfg: criterion_excluded(cfg["tamper"]),
    3: lambda cfg: criterion_constants(cfg["seed"], tamper=cfg["tamper"]),
    4: lambda cfg: criterion_permutations(),
    5: lambda cfg: criterion_counting(),
    6: lambda cfg: criterion_chebotarev(cfg["X"]),
    7: lambda cfg: criterion_sifting(cfg["seed"]),
    8: lambda cfg: criterion_lod(),
    9: lambda cfg: criterion_determinism(cfg["seed"]),
}


def run_selfcheck(X: int = 10 ** 6, seed: int = 0, tamper: Optional[dict] = None,
                  only: Optional[list] = None,
                  on_result: Optional[Callable[[Criterion], None]] = None) -> dict:
    """Run the criteria (all, or ``only``) and return the JSON-ready report."""
    cfg = {"X": int(X), "seed": int(seed), "tamper": dict(tamper or {})}
    results = []
    for number in sorted(only or CRITERIA):
        res = CRITERIA[number](cfg)
        results.append(res)
        if on_result is not None:
            on_result(res)
    return {"config": {"X": cfg["X"], "seed": cfg["seed"], "tamper": cfg["tamper"],
                       "criteria": [r.number for r in results]},
            "criteria": [r.to_dict() for r in results],
            "passed": all(r.passed for r in results)}
