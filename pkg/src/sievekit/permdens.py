"""Cycle statistics of permutation groups, in exact rational arithmetic.

T(G) is the proportion of elements of G whose cycle lengths share a
common factor and h(G) the proportion of fixed-point-free elements.
For the symmetric group these come from closed-form products, for other
groups from cycle-type class counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Optional, Sequence, Union

from sympy import isprime, primefactors
from sympy.utilities.iterables import partitions

from .specfun import CertifiedValue, DomainError


@dataclass(frozen=True)
class CycleType:
    """A partition, stored with parts in descending order."""
    parts: tuple

    def __post_init__(self):
        parts = tuple(sorted((int(p) for p in self.parts), reverse=True))
        if not parts or parts[-1] < 1:
            raise ValueError("cycle type needs at least one positive part")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def gcd(self) -> int:
        return reduce(math.gcd, self.parts)

    def has_fixed_point(self) -> bool:
        return self.parts[-1] == 1

    def is_even(self) -> bool:
        return (self.n - len(self.parts)) % 2 == 0

    def __str__(self):
        return "{" + ",".join(map(str, self.parts)) + "}"


def cycle_type(perm: Sequence[int]) -> CycleType:
    """Cycle type of a permutation given as the image list of 0..n-1."""
    n = len(perm)
    seen = [False] * n
    parts = []
    for i in range(n):
        if seen[i]:
            continue
        length, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parts.append(length)
    return CycleType(tuple(parts))


@lru_cache(maxsize=None)
def _stirling_row(m: int) -> tuple:
    if m == 0:
        return (1,)
    prev = _stirling_row(m - 1)
    row = [0] * (m + 1)
    for i in range(1, m + 1):
        left = prev[i - 1]
        right = prev[i] if i < len(prev) else 0
        row[i] = left + (m - 1) * right
    return tuple(row)


def stirling_first(m: int, i: int) -> int:
    """Unsigned Stirling number of the first kind c(m, i)."""
    if m < 0 or i < 0:
        raise ValueError("arguments must be non-negative")
    if i > m:
        return 0
    for j in range(0, m, 200):  # fill the cache without deep recursion
        _stirling_row(j)
    return _stirling_row(m)[i]


def T_k_of_n(n: int, k: int) -> Fraction:
    """Proportion of S_n whose cycle lengths are all divisible by k."""
    if n < 1 or k < 1 or n % k:
        raise DomainError(f"k={k} does not divide n={n}")
    m = n // k
    # prod_{j<m} (j + 1/k) / m!  =  prod (jk + 1) / (k^m m!)
    num = math.prod(j * k + 1 for j in range(m))
    return Fraction(num, k ** m * math.factorial(m))


def mobius(n: int) -> int:
    ps = primefactors(n)
    m = n
    for p in ps:
        m //= p
        if m % p == 0:
            return 0
    return -1 if len(ps) % 2 else 1


def T_exact(n: int) -> Fraction:
    """Proportion of S_n whose cycle lengths are not coprime."""
    if n < 1:
        raise DomainError("n must be positive")
    total = Fraction(0)
    ps = primefactors(n)
    for mask in range(1 << len(ps)):
        k, sign = 1, 1
        for bit, p in enumerate(ps):
            if mask >> bit & 1:
                k *= p
                sign = -sign
        total += sign * T_k_of_n(n, k)
    return 1 - total


def T_upper_bound(n: int) -> float:
    """(2/sqrt(pi)) n^{1/r - 1} omega(n), r the least prime factor of n."""
    if n < 2:
        raise DomainError("bound needs n >= 2")
    ps = primefactors(n)
    return 2 / math.sqrt(math.pi) * n ** (1 / ps[0] - 1) * len(ps)


# --- excluded degrees ------------------------------------------------------

ThresholdLike = Union[Fraction, float, int, CertifiedValue, tuple]


def _threshold_interval(threshold: ThresholdLike):
    if isinstance(threshold, CertifiedValue):
        lo, hi = threshold.lo, threshold.hi
    elif isinstance(threshold, tuple):
        lo, hi = threshold
    else:
        lo = hi = threshold
    lo, hi = Fraction(lo), Fraction(hi)
    if not 0 < lo <= hi < 1:
        raise DomainError("threshold must lie in (0, 1)")
    return lo, hi


def _primorials():
    prod, p = 1, 1
    while True:
        p += 1
        if isprime(p):
            prod *= p
            yield prod


def analytic_cutoff(threshold: float) -> int:
    """N such that T_upper_bound(n) < threshold for every n > N.

    The bound is decreasing in the least prime factor r, so r = 2 is the
    worst case; an integer with w distinct prime factors is at least the
    w-th primorial, and w / sqrt(primorial) decreases from w = 2 on.
    """
    c = 2 / math.sqrt(math.pi) / threshold
    cutoff = 1
    for w, prim in enumerate(_primorials(), start=1):
        need = (c * w) ** 2  # n > need gives c w n^{-1/2} < 1
        if prim > need:
            if w >= 2:
                break
            continue
        cutoff = max(cutoff, math.ceil(need))
    return cutoff


@dataclass
class ExcludedReport:
    degrees: list
    boundary: list
    n_max: int
    threshold_lo: Fraction
    threshold_hi: Fraction
    analytic_cutoff: int
    exact_checked_up_to: int
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "degrees": self.degrees,
            "boundary": self.boundary,
            "n_max": self.n_max,
            "threshold": [float(self.threshold_lo), float(self.threshold_hi)],
            "analytic_cutoff": self.analytic_cutoff,
            "exact_checked_up_to": self.exact_checked_up_to,
        }


def excluded_report(threshold: ThresholdLike, n_max: int = 200) -> ExcludedReport:
    """All n in [2, n_max] with T(n) above the threshold, plus a finiteness check.

    Degrees above n_max are cleared by T_upper_bound where it suffices and
    by the exact value of T(n) in the remaining finite range.
    """
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    lo, hi = _threshold_interval(threshold)
    degrees, boundary, values = [], [], {}
    for n in range(2, n_max + 1):
        t = T_exact(n)
        values[n] = t
        if t > hi:
            degrees.append(n)
        elif t >= lo:
            boundary.append(n)
    cutoff = analytic_cutoff(float(lo) * (1 - 1e-12))
    for n in range(n_max + 1, cutoff + 1):
        if T_upper_bound(n) < float(lo) * (1 - 1e-12):
            continue
        if T_exact(n) >= lo:
            raise DomainError(
                f"degree {n} > n_max={n_max} is not below the threshold; rerun with n_max >= {n}")
    return ExcludedReport(degrees, boundary, n_max, lo, hi, cutoff,
                          max(cutoff, n_max), values)


def excluded_degrees(threshold: ThresholdLike, n_max: int = 200) -> list:
    return excluded_report(threshold, n_max).degrees


# --- groups ---------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """A permutation group: symmetric(n), alternating(n), agl1(q), explicit."""
    variant: str
    degree: int = 0
    elements: Optional[tuple] = None

    @classmethod
    def symmetric(cls, n: int) -> "GroupSpec":
        return cls("symmetric", n)

    @classmethod
    def alternating(cls, n: int) -> "GroupSpec":
        return cls("alternating", n)

    @classmethod
    def agl1(cls, q: int) -> "GroupSpec":
        if not isprime(q):
            raise DomainError(f"AGL(1,q) needs q prime, got {q}")
        return cls("agl1", q)

    @classmethod
    def explicit(cls, perms: Iterable[Sequence[int]], check: bool = True) -> "GroupSpec":
        elems = tuple(tuple(int(x) for x in p) for p in perms)
        if not elems:
            raise DomainError("empty element list")
        n = len(elems[0])
        for p in elems:
            if len(p) != n or sorted(p) != list(range(n)):
                raise DomainError(f"not a permutation of {n} points: {p}")
        if len(set(elems)) != len(elems):
            raise DomainError("duplicate elements")
        if check and n <= 10:
            _check_closed(elems)
        return cls("explicit", n, elems)

    def order(self) -> int:
        if self.variant == "symmetric":
            return math.factorial(self.degree)
        if self.variant == "alternating":
            return max(1, math.factorial(self.degree) // 2)
        if self.variant == "agl1":
            return self.degree * (self.degree - 1)
        return len(self.elements)


def _check_closed(elems: tuple) -> None:
    s = set(elems)
    for g in elems:
        inv = [0] * len(g)
        for i, x in enumerate(g):
            inv[x] = i
        if tuple(inv) not in s:
            raise DomainError("element list is not closed under inverses")
        for h in elems:
            if tuple(g[x] for x in h) not in s:
                raise DomainError("element list is not closed under composition")


def class_size(ct: CycleType) -> int:
    """Number of elements of S_n with the given cycle type."""
    size = math.factorial(ct.n)
    counts: dict = {}
    for part in ct.parts:
        counts[part] = counts.get(part, 0) + 1
    for j, m in counts.items():
        size //= j ** m * math.factorial(m)
    return size


def symmetric_cycle_types(n: int):
    """Yield (CycleType, class size) over all partitions of n."""
    for part in partitions(n):
        parts = [j for j, m in part.items() for _ in range(m)]
        ct = CycleType(tuple(parts))
        yield ct, class_size(ct)


def cycle_type_distribution(G: GroupSpec) -> dict:
    """Map CycleType -> number of elements of G with that type."""
    if G.variant in ("symmetric", "alternating"):
        if G.degree < 1:
            raise DomainError("degree must be positive")
        even_only = G.variant == "alternating"
        return {ct: sz for ct, sz in symmetric_cycle_types(G.degree)
                if not even_only or ct.is_even()}
    if G.variant == "agl1":
        q = G.degree
        dist = {CycleType((1,) * q): 1, CycleType((q,)): q - 1}
        # x -> ax + b, a != 1: one fixed point, the rest in cycles of ord(a)
        for a in range(2, q):
            o = _mult_order(a, q)
            ct = CycleType((1,) + (o,) * ((q - 1) // o))
            dist[ct] = dist.get(ct, 0) + q
        return dist
    if G.variant == "explicit":
        dist = {}
        for g in G.elements:
            ct = cycle_type(g)
            dist[ct] = dist.get(ct, 0) + 1
        return dist
    raise DomainError(f"unknown group variant {G.variant!r}")


def _mult_order(a: int, q: int) -> int:
    o, x = 1, a % q
    while x != 1:
        x = x * a % q
        o += 1
    return o


def T_of_group(G: GroupSpec) -> Fraction:
    dist = cycle_type_distribution(G)
    bad = sum(c for ct, c in dist.items() if ct.gcd > 1)
    return Fraction(bad, sum(dist.values()))


def h_fixed_point_free(G: GroupSpec) -> Fraction:
    dist = cycle_type_distribution(G)
    free = sum(c for ct, c in dist.items() if not ct.has_fixed_point())
    return Fraction(free, sum(dist.values()))


# --- the degree condition for products of binomial norm forms -------------

HW_QUADRATIC_BOUND = Fraction("0.39000")
HW_CUBIC_BOUND = Fraction("0.32380")


@dataclass(frozen=True)
class HWCheck:
    holds: bool
    lhs: Fraction
    bound: Fraction

    @property
    def margin(self) -> float:
        return float(self.bound - self.lhs)

    def to_dict(self) -> dict:
        return {"holds": self.holds, "lhs": float(self.lhs),
                "bound": float(self.bound), "margin": self.margin}


def hw_condition_check(degrees: Sequence[int], qs: Sequence[int],
                       variant: str = "quadratic") -> HWCheck:
    """Sum of 1/q (quadratic) or 1/(q-1) (cubic) against the threshold over d."""
    if len(degrees) != len(qs):
        raise DomainError("degrees and qs must have equal length")
    if any(not 1 <= d <= 3 for d in degrees):
        raise DomainError("each degree must be 1, 2 or 3")
    d = sum(degrees)
    if d < 1:
        raise DomainError("total degree must be positive")
    for q in qs:
        if not isprime(q):
            raise DomainError(f"{q} is not prime")
    if variant == "quadratic":
        lhs = sum((Fraction(1, q) for q in qs), Fraction(0))
        bound = HW_QUADRATIC_BOUND / d
    elif variant == "cubic":
        lhs = sum((Fraction(1, q - 1) for q in qs), Fraction(0))
        bound = HW_CUBIC_BOUND / d
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return HWCheck(lhs <= bound, lhs, bound)
