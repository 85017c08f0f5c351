"""Exact evaluation of sifting counts over a region and congruence class.

S(P, B, N) counts integer pairs (a, b) with 0 < a, b <= N, |a/b - r| < xi,
(a, b) = (a0, b0) mod Delta, and f(a, b) free of prime factors in P.
The count is computed directly: a vectorized small-prime stage, a
residue-class shortcut for congruence-defined P, and factorization of the
few cofactors left over.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
import sympy
from sympy import factorint, isprime, primefactors

from .arith.chebotarev import ramified_primes, split_condition_mask, theta_estimate
from .arith.polys import X, BinaryForm, FactoredBinaryForm, parse_polynomial
from .arith.primes import small_primes
from .specfun import DomainError

WITNESS_CAP = 100
N_EXHAUSTIVE_MAX = 10 ** 5
INT64_SAFE = 2 ** 62


def _exact(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Region:
    """{(x, y) in (0, N]^2 : |x/y - ratio| < window}."""
    ratio: Fraction
    window: Fraction
    N: int

    def __post_init__(self):
        object.__setattr__(self, "ratio", _exact(self.ratio))
        object.__setattr__(self, "window", _exact(self.window))
        if self.ratio <= 0 or self.window <= 0 or self.N < 1:
            raise DomainError("region needs ratio > 0, window > 0, N >= 1")

    @property
    def slopes(self):
        return max(self.ratio - self.window, Fraction(0)), self.ratio + self.window

    def contains(self, a: int, b: int) -> bool:
        lo, hi = self.ratio - self.window, self.ratio + self.window
        return 0 < a <= self.N and 0 < b <= self.N and lo * b < a < hi * b

    def row_bounds(self, b: np.ndarray):
        """Smallest and largest admissible a for each row b (may cross)."""
        lo, hi = self.ratio - self.window, self.ratio + self.window
        amin = (lo.numerator * b) // lo.denominator + 1
        amax = -((-hi.numerator * b) // hi.denominator) - 1
        return np.maximum(amin, 1), np.minimum(amax, self.N)

    def volume(self) -> float:
        def F(s: Fraction) -> Fraction:
            if s <= 1:
                return s / 2
            return 1 - 1 / (2 * s)
        s1, s2 = self.slopes
        return float(self.N ** 2 * (F(s2) - F(s1)))

    def perimeter_bound(self) -> int:
        return 4 * self.N

    def to_dict(self) -> dict:
        return {"ratio": _frac_str(self.ratio), "window": _frac_str(self.window), "N": self.N}


@dataclass(frozen=True)
class CongruenceClass:
    modulus: int
    a0: int
    b0: int

    def __post_init__(self):
        if self.modulus < 1:
            raise DomainError("modulus must be positive")
        if not (0 <= self.a0 < self.modulus and 0 <= self.b0 < self.modulus):
            raise DomainError("residues must lie in [0, modulus)")

    def to_dict(self) -> dict:
        return {"modulus": self.modulus, "a0": self.a0, "b0": self.b0}


@dataclass(frozen=True)
class SiftingSetSpec:
    """The sifting set P, minus the excluded primes S.

    congruence-union: p = t_j mod q_j for some j; split-condition: the
    splitting type of ``poly`` mod p satisfies ``predicate`` (ramified primes
    are never members); explicit: a finite list.
    """
    variant: str
    classes: tuple = ()
    poly: tuple = ()
    predicate: str = ""
    primes: frozenset = frozenset()
    excluded: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "excluded", frozenset(int(p) for p in self.excluded))
        object.__setattr__(self, "primes", frozenset(int(p) for p in self.primes))
        object.__setattr__(self, "classes", tuple((int(t), int(q)) for t, q in self.classes))
        object.__setattr__(self, "poly", tuple(int(c) for c in self.poly))
        if self.variant == "congruence-union":
            for t, q in self.classes:
                if q < 1 or math.gcd(t, q) != 1:
                    raise DomainError(f"class {t} mod {q} needs gcd(t, q) = 1")
        elif self.variant == "split-condition":
            if len(self.poly) < 2 or not self.predicate:
                raise DomainError("split-condition needs a polynomial and a predicate")
        elif self.variant != "explicit":
            raise DomainError(f"unknown sifting variant {self.variant!r}")

    @classmethod
    def empty(cls) -> "SiftingSetSpec":
        return cls("explicit")

    def is_empty(self) -> bool:
        if self.variant == "explicit":
            return not (self.primes - self.excluded)
        if self.variant == "congruence-union":
            return not self.classes
        return False

    @property
    def modulus(self) -> Optional[int]:
        if self.variant != "congruence-union" or not self.classes:
            return None
        return math.lcm(*(q for _, q in self.classes))

    def contains(self, p: int) -> bool:
        return bool(self.mask(np.array([p], dtype=np.int64))[0])

    def mask(self, primes: np.ndarray) -> np.ndarray:
        primes = np.asarray(primes, dtype=np.int64)
        if self.variant == "explicit":
            out = np.isin(primes, np.array(sorted(self.primes), dtype=np.int64))
        elif self.variant == "congruence-union":
            out = np.zeros(len(primes), dtype=bool)
            for t, q in self.classes:
                out |= primes % q == t % q
        else:
            out = split_condition_mask(self.poly, self.predicate, primes)
        if self.excluded:
            out &= ~np.isin(primes, np.array(sorted(self.excluded), dtype=np.int64))
        return out

    def to_dict(self) -> dict:
        d = {"variant": self.variant, "excluded": sorted(self.excluded)}
        if self.variant == "congruence-union":
            d["classes"] = [list(c) for c in self.classes]
        elif self.variant == "split-condition":
            d["poly"] = list(self.poly)
            d["predicate"] = self.predicate
        else:
            d["primes"] = sorted(self.primes)
        return d


@dataclass(frozen=True)
class SiftProblem:
    form: FactoredBinaryForm
    region: Region
    congruence: CongruenceClass
    sifting: SiftingSetSpec

    def __post_init__(self):
        delta = self.congruence.modulus
        for p in self.sifting.excluded:
            if delta % p:
                raise DomainError(f"excluded prime {p} must divide the modulus {delta}")
        for p in primefactors(delta):
            if self.sifting.contains(int(p)):
                raise DomainError(f"modulus {delta} shares the admitted sifting prime {p}")

    def to_dict(self) -> dict:
        return {"form": str(self.form), "region": self.region.to_dict(),
                "congruence": self.congruence.to_dict(), "sifting": self.sifting.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SiftProblem":
        reg, con, sif = d["region"], d["congruence"], d.get("sifting", {"variant": "explicit"})
        variant = sif["variant"]
        kwargs = {"excluded": frozenset(sif.get("excluded", ()))}
        if variant == "congruence-union":
            kwargs["classes"] = tuple(tuple(c) for c in sif["classes"])
        elif variant == "split-condition":
            poly = sif["poly"]
            kwargs["poly"] = parse_polynomial(poly) if isinstance(poly, str) else tuple(poly)
            kwargs["predicate"] = sif["predicate"]
        else:
            kwargs["primes"] = frozenset(sif.get("primes", ()))
        return cls(FactoredBinaryForm.parse(d["form"]),
                   Region(Fraction(str(reg["ratio"])), Fraction(str(reg["window"])), int(reg["N"])),
                   CongruenceClass(int(con["modulus"]), int(con["a0"]), int(con["b0"])),
                   SiftingSetSpec(variant, **kwargs))


# --- residue-class obstruction ------------------------------------------------

def _allowed_subgroup(spec: SiftingSetSpec) -> Optional[np.ndarray]:
    """Boolean table over Z/Q of the subgroup generated by the residues of
    non-members: unit classes outside every t_j mod q_j, and excluded primes."""
    Q = spec.modulus
    if Q is None:
        return None
    units = [u for u in range(Q) if math.gcd(u, Q) == 1]
    gens = [u for u in units if not any(u % q == t % q for t, q in spec.classes)]
    gens += [p % Q for p in spec.excluded if Q % p]
    H = np.zeros(Q, dtype=bool)
    H[1 % Q] = True
    frontier = [1 % Q]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                x = h * g % Q
                if not H[x]:
                    H[x] = True
                    nxt.append(x)
        frontier = nxt
    return H


def _sign_on_region(f: BinaryForm, region: Region) -> Optional[int]:
    """Constant sign of f on the region, or None if f(t, 1) has a root there."""
    if f.is_y:
        return 1
    s1, s2 = region.slopes
    poly = sympy.Poly(list(f.coeffs), X)
    if poly.count_roots(sympy.Rational(s1.numerator, s1.denominator),
                        sympy.Rational(s2.numerator, s2.denominator)):
        return None
    mid = (s1 + s2) / 2
    val = sum(c * mid ** (f.degree - i) for i, c in enumerate(f.coeffs))
    return 1 if val > 0 else -1


def residue_obstruction(problem: SiftProblem) -> list:
    """Factors whose values provably contain a prime of P on the whole class.

    Work mod Q = lcm(q_j), which must divide Delta, so f_i(a, b) is congruent
    to f_i(a0, b0). If f_i keeps one sign on the region and sign * f_i(a0, b0)
    is a unit mod Q outside the subgroup generated by non-member residues,
    then every value |f_i(a, b)| has a prime factor in P.
    """
    spec = problem.sifting
    Q = spec.modulus
    if Q is None or problem.congruence.modulus % Q:
        return []
    H = _allowed_subgroup(spec)
    a0, b0 = problem.congruence.a0, problem.congruence.b0
    certs = []
    for f in problem.form.factors:
        sign = _sign_on_region(f, problem.region)
        if sign is None:
            continue
        signed = sign * f(a0, b0)
        res = signed % Q
        if math.gcd(res, Q) == 1 and not H[res]:
            certs.append({"factor": str(f), "sign_on_region": sign, "value_at_class": signed,
                          "modulus": Q, "residue": res,
                          "allowed_residues": [int(u) for u in np.flatnonzero(H)]})
    return certs


# --- counting -------------------------------------------------------------

@dataclass
class SiftResult:
    count: int
    points: int
    witnesses: list = field(default_factory=list)
    certificate: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"count": self.count, "points_in_class": self.points,
                "witnesses": [{"a": a, "b": b, "value": str(v),
                               "factorization": {str(p): e for p, e in sorted(fz.items())}}
                              for a, b, v, fz in self.witnesses],
                "certificate": self.certificate}


def class_points(region: Region, cong: CongruenceClass, b_lo: int = 1, b_hi: Optional[int] = None):
    """All (a, b) in region and congruence class with b_lo <= b <= b_hi."""
    delta = cong.modulus
    b_hi = region.N if b_hi is None else b_hi
    first_b = b_lo + (cong.b0 - b_lo) % delta
    b = np.arange(first_b, b_hi + 1, delta, dtype=np.int64)
    amin, amax = region.row_bounds(b)
    afirst = amin + (cong.a0 - amin) % delta
    counts = np.where(amax >= afirst, (amax - afirst) // delta + 1, 0)
    total = int(counts.sum())
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    a = np.repeat(afirst, counts) + delta * (np.arange(total, dtype=np.int64) - starts)
    return a, np.repeat(b, counts)


class _Sieve:
    def __init__(self, problem: SiftProblem, small_bound: int):
        spec = problem.sifting
        self.spec = spec
        self.empty = spec.is_empty()
        Q = spec.modulus
        special = set(spec.excluded) | set(primefactors(Q) if Q else [])
        special |= set(primefactors(problem.congruence.modulus))
        self.pre = sorted(int(p) for p in special)
        rest = [int(p) for p in small_primes(small_bound) if int(p) not in special]
        self.small = rest
        allp = np.array(self.pre + self.small, dtype=np.int64)
        member = spec.mask(allp) if len(allp) else np.zeros(0, dtype=bool)
        self.member = dict(zip(allp.tolist(), member.tolist()))
        self.bound2 = small_bound * small_bound
        self.Q = Q
        self.H = _allowed_subgroup(spec)

    def _strip(self, v: np.ndarray, alive: np.ndarray, primes: list) -> None:
        for ell in primes:
            idx = np.flatnonzero(alive)
            if not len(idx):
                return
            vv = v[idx]
            div = vv % ell == 0
            if not div.any():
                continue
            if self.member[ell]:
                alive[idx[div]] = False
                continue
            while div.any():
                vv[div] //= ell
                div = vv % ell == 0
            v[idx] = vv

    def survivors(self, form: FactoredBinaryForm, a: np.ndarray, b: np.ndarray, wide: bool) -> np.ndarray:
        alive = np.ones(len(a), dtype=bool)
        if self.empty:
            return alive
        for f in form.factors:
            if wide:
                v = np.abs(f.evaluate_array(a.astype(object), b.astype(object)))
            else:
                v = np.abs(f.evaluate_array(a, b))
            alive &= v != 0  # every prime of P divides 0
            v = np.where(v == 0, 1, v)
            self._strip(v, alive, self.pre)
            if self.H is not None:
                idx = np.flatnonzero(alive)
                res = (v[idx] % self.Q).astype(np.int64)
                alive[idx[~self.H[res]]] = False
            self._strip(v, alive, self.small)
            idx = np.flatnonzero(alive & (v > 1))
            if not len(idx):
                continue
            c = v[idx]
            small = c < self.bound2
            si = idx[small]
            if len(si):
                hit = self.spec.mask(np.asarray(c[small], dtype=np.int64))
                alive[si[hit]] = False
            for i, cv in zip(idx[~small].tolist(), c[~small].tolist()):
                if any(self.spec.contains(int(p)) for p in factorint(int(cv))):
                    alive[i] = False
        return alive


def sift_count(problem: SiftProblem, witness_cap: int = WITNESS_CAP, small_bound: int = 1000,
               rows_per_chunk: int = 2048, workers: int = 1,
               n_max: int = N_EXHAUSTIVE_MAX) -> SiftResult:
    """Exact S(P, B, N) with up to ``witness_cap`` lexicographically first witnesses."""
    region, cong, form = problem.region, problem.congruence, problem.form
    if region.N > n_max:
        raise DomainError(f"N={region.N} above the exhaustive cap {n_max}")
    bound = max(f.value_bound(region.N) for f in form.factors)
    if bound >= 2 ** 127:
        raise DomainError("form values exceed 128 bits on this region")
    wide = bound >= INT64_SAFE
    sieve = _Sieve(problem, small_bound)
    step = rows_per_chunk * cong.modulus
    ranges = [(lo, min(lo + step - 1, region.N)) for lo in range(1, region.N + 1, step)]

    def run(rng):
        a, b = class_points(region, cong, *rng)
        keep = sieve.survivors(form, a, b, wide)
        a, b = a[keep], b[keep]
        order = np.lexsort((b, a))[:witness_cap]
        return len(keep), int(keep.sum()), a[order], b[order]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, ranges))
    else:
        results = [run(r) for r in ranges]
    points = sum(r[0] for r in results)
    count = sum(r[1] for r in results)
    wa = np.concatenate([r[2] for r in results]) if results else np.zeros(0, dtype=np.int64)
    wb = np.concatenate([r[3] for r in results]) if results else np.zeros(0, dtype=np.int64)
    order = np.lexsort((wb, wa))[:witness_cap]
    witnesses = []
    for a, b in zip(wa[order].tolist(), wb[order].tolist()):
        val = form(a, b)
        witnesses.append((a, b, val, factorint(val) if val else {}))
    return SiftResult(count, points, witnesses, residue_obstruction(problem))


def raw_count(problem: SiftProblem) -> int:
    """Reference count by a plain double loop; for small N only."""
    region, cong = problem.region, problem.congruence
    total = 0
    for b in range(1, region.N + 1):
        if b % cong.modulus != cong.b0:
            continue
        for a in range(1, region.N + 1):
            if a % cong.modulus != cong.a0 or not region.contains(a, b):
                continue
            v = problem.form(a, b)
            if problem.sifting.is_empty():
                total += 1
            elif v != 0 and not any(problem.sifting.contains(int(p)) for p in factorint(abs(v))):
                total += 1
    return total


# --- worked examples ------------------------------------------------------

def iskovskikh_problem(N: int = 1000) -> SiftProblem:
    return SiftProblem(
        FactoredBinaryForm.parse("(x^2-2y^2)(-x^2+3y^2)"),
        Region(Fraction(6, 5), Fraction(1, 10), N),
        CongruenceClass(16, 8, 1),
        SiftingSetSpec("congruence-union", classes=((3, 4),), excluded={2}),
    )


def irving_problem(q: int, r: int, f: str = "x^3-3y^3", N: int = 200,
                   ratio=Fraction(1), window=Fraction(1, 2)) -> SiftProblem:
    if not isprime(q):
        raise DomainError(f"q={q} must be prime")
    binom = (1,) + (0,) * (q - 1) + (-r,)
    if not sympy.Poly(list(binom), X).is_irreducible:
        raise DomainError(f"x^{q}-{r} is reducible")
    F = FactoredBinaryForm.parse(f"y*({f})")
    S = set(ramified_primes(binom)) | set(F.bad_primes())
    delta = math.prod(S) if S else 1
    return SiftProblem(
        F,
        Region(ratio, window, N),
        CongruenceClass(delta, 1 % delta, 1 % delta),
        SiftingSetSpec("split-condition", poly=binom, predicate="non-coprime", excluded=S),
    )


@dataclass
class HasseReport:
    preset: str
    problem: SiftProblem
    theta: object
    threshold_variant: Optional[str]
    threshold: Optional[float]
    kappa_estimate: float
    kappa_half_width: float
    kappa_trivial: float
    verdict: str
    verdict_trivial: str
    sift: SiftResult

    def to_dict(self) -> dict:
        return {"preset": self.preset, "problem": self.problem.to_dict(),
                "densities": self.theta.to_dict(),
                "alpha_theta": {"estimate": self.kappa_estimate, "half_width": self.kappa_half_width},
                "alpha_times_degree": self.kappa_trivial,
                "threshold_variant": self.threshold_variant, "threshold": self.threshold,
                "verdict": self.verdict, "verdict_trivial_bound": self.verdict_trivial,
                "sift": self.sift.to_dict()}


def _threshold_for_degree(d: int):
    from .constants import solve_threshold_cached
    if d <= 2:
        return "quadratic-general", solve_threshold_cached("quadratic-general").value
    if d == 3:
        return "cubic", solve_threshold_cached("cubic").value
    return None, None


def hasse_example_report(preset: str, N: int = 1000, X: int = 10 ** 6, q: int = 7, r: int = 2,
                         f: str = "x^3-3y^3") -> HasseReport:
    """Assemble the sieve problem of a worked example and compare its dimension."""
    if preset == "iskovskikh":
        problem = iskovskikh_problem(N)
    elif preset == "irving":
        problem = irving_problem(q, r, f, N)
    else:
        raise DomainError(f"unknown preset {preset!r}")
    spec = problem.sifting
    th = theta_estimate(problem.form, spec.mask, X, S=sorted(spec.excluded))
    a = th.alpha
    ksum = sum(t.estimate for t in th.theta)
    kappa = a.estimate * ksum
    # first-order error propagation of alpha * sum(theta)
    hw = a.half_width * ksum + a.estimate * sum(t.half_width for t in th.theta)
    trivial = a.estimate * problem.form.squarefree_degree
    variant, thr = _threshold_for_degree(max(g.degree for g in problem.form.factors))
    verdict = _verdict(kappa - hw, kappa + hw, thr)
    verdict_trivial = _verdict(trivial - a.half_width * problem.form.squarefree_degree,
                               trivial + a.half_width * problem.form.squarefree_degree, thr)
    return HasseReport(preset, problem, th, variant, thr, kappa, hw, trivial, verdict,
                       verdict_trivial, sift_count(problem))


def _verdict(lo: float, hi: float, thr: Optional[float]) -> str:
    if thr is None or lo > thr:
        return "outside range"
    if hi < thr:
        return "inside range"
    return "inconclusive"
