"""Lattice point counts and level-of-distribution remainder sums.

A(d1, d2) counts points of the region in the class (a0, b0) mod Delta with
d1 | g1(a, b) and d2 | g2(a, b); the model value is
rho(d1, d2) Vol / (d^2 Delta^2) with d = d1 d2, and r(d1, d2) is the
difference. The sum of |r| over d1 <= D1, d2 <= D2 should grow more slowly
than N^2 when D1 D2 is a small power of N.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .arith.polys import BinaryForm, FactoredBinaryForm
from .sifter import CongruenceClass, Region, class_points
from .specfun import DomainError

CSV_HEADER = "# sievekit-v1"
CROSS_CHECK_CAP = 500


# --- two-dimensional lattices ---------------------------------------------

@dataclass(frozen=True)
class Lattice2:
    v1: tuple
    v2: tuple

    @property
    def det(self) -> int:
        return abs(self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0])

    @property
    def lambda1(self) -> float:
        return math.hypot(*self.v1)


def _dot(u, v) -> int:
    return u[0] * v[0] + u[1] * v[1]


def gauss_reduce(basis: Sequence[Sequence[int]]) -> Lattice2:
    """Lagrange-Gauss reduction in exact integer arithmetic."""
    v1, v2 = (tuple(int(c) for c in v) for v in basis)
    if v1[0] * v2[1] - v1[1] * v2[0] == 0:
        raise DomainError("singular basis")
    if _dot(v1, v1) > _dot(v2, v2):
        v1, v2 = v2, v1
    while True:
        n1 = _dot(v1, v1)
        # nearest integer to <v1, v2> / <v1, v1>, ties toward zero
        num = _dot(v1, v2)
        mu = (2 * num + n1) // (2 * n1)
        if mu:
            v2 = (v2[0] - mu * v1[0], v2[1] - mu * v1[1])
        if _dot(v2, v2) < n1:
            v1, v2 = v2, v1
            continue
        break
    return Lattice2(v1, v2)


# --- convex regions as integer half-planes ---------------------------------

@dataclass(frozen=True)
class HalfPlanes:
    """Intersection of alpha*x + beta*y (> or >=) gamma, all integers."""
    planes: tuple  # (alpha, beta, gamma, strict)
    vertices: tuple  # polygon vertices as floats, for volume and perimeter

    @property
    def volume(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        s = sum(v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1]
                for i in range(len(v)))
        return abs(s) / 2

    @property
    def N(self) -> int:
        """Largest row index that can meet the region."""
        return max(0, math.ceil(max((y for _, y in self.vertices), default=0)))

    def row_bounds(self, b: np.ndarray):
        """Smallest and largest integer x in the region on each row y = b."""
        b = np.asarray(b, dtype=np.int64)
        lo = np.full(b.shape, -2 ** 62, dtype=np.int64)
        hi = np.full(b.shape, 2 ** 62, dtype=np.int64)
        ok = np.ones(b.shape, dtype=bool)
        for a, bb, c, strict in self.planes:
            t = c - bb * b
            if a > 0:
                lo = np.maximum(lo, _floordiv(t, a) + 1 if strict else _ceildiv(t, a))
            elif a < 0:
                hi = np.minimum(hi, _ceildiv(t, a) - 1 if strict else _floordiv(t, a))
            else:
                ok &= (0 > t) if strict else (0 >= t)
        return np.where(ok, lo, 1), np.where(ok, hi, 0)

    @property
    def perimeter(self) -> float:
        v = self.vertices
        if len(v) < 2:
            return 0.0
        return sum(math.dist(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def _clip(poly, a, b, c):
    """Clip a polygon (list of float points) to a*x + b*y >= c."""
    out = []
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        fp, fq = a * p[0] + b * p[1] - c, a * q[0] + b * q[1] - c
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _from_planes(planes, box) -> HalfPlanes:
    poly = [(0.0, 0.0), (box, 0.0), (box, box), (0.0, box)]
    for a, b, c, _ in planes:
        poly = _clip(poly, a, b, c)
        if not poly:
            break
    return HalfPlanes(tuple(planes), tuple(poly))


def region_half_planes(region: Region) -> HalfPlanes:
    lo, hi = region.ratio - region.window, region.ratio + region.window
    N = region.N
    planes = [
        (1, 0, 0, True), (-1, 0, -N, False), (0, 1, 0, True), (0, -1, -N, False),
        (lo.denominator, -lo.numerator, 0, True),   # x > lo * y
        (-hi.denominator, hi.numerator, 0, True),   # x < hi * y
    ]
    return _from_planes(planes, N)


def box_half_planes(L: int) -> HalfPlanes:
    """The square (0, L]^2."""
    planes = [(1, 0, 0, True), (-1, 0, -L, False), (0, 1, 0, True), (0, -1, -L, False)]
    return _from_planes(planes, L)


def _as_planes(region) -> HalfPlanes:
    if isinstance(region, HalfPlanes):
        return region
    if isinstance(region, Region):
        return region_half_planes(region)
    raise TypeError("region must be a Region or HalfPlanes")


@dataclass(frozen=True)
class LatticeCount:
    count: int
    model: float
    lambda1: float
    perimeter: float
    constant: float  # |count - model| / (perimeter / lambda1 + 1)

    def to_dict(self) -> dict:
        return {"count": self.count, "model": self.model, "lambda1": self.lambda1,
                "perimeter": self.perimeter, "constant": self.constant}


def _floordiv(a, b):
    return a // b


def _ceildiv(a, b):
    return -((-a) // b)


def lattice_points_in_region(lat: Lattice2, offset: Sequence[int], region) -> LatticeCount:
    """Exact number of points of offset + lattice inside the region.

    Rows are indexed by the coefficient j of v2; within a row each
    half-plane gives an exact integer bound on the coefficient i of v1.
    """
    hp = _as_planes(region)
    lat = gauss_reduce((lat.v1, lat.v2))
    (ax, ay), (bx, by) = lat.v1, lat.v2
    ox, oy = int(offset[0]), int(offset[1])
    det = ax * by - ay * bx
    count = 0
    if len(hp.vertices) >= 3:
        # j = (ax (y - oy) - ay (x - ox)) / det over the polygon vertices
        js = [(ax * (y - oy) - ay * (x - ox)) / det for x, y in hp.vertices]
        j = np.arange(math.floor(min(js)) - 1, math.ceil(max(js)) + 2, dtype=np.int64)
        ilo = np.full(len(j), -2 ** 62, dtype=np.int64)
        ihi = np.full(len(j), 2 ** 62, dtype=np.int64)
        ok = np.ones(len(j), dtype=bool)
        for a, b, c, strict in hp.planes:
            s = a * ax + b * ay
            t = c - a * (ox + j * bx) - b * (oy + j * by)
            if s > 0:
                bound = _floordiv(t, s) + 1 if strict else _ceildiv(t, s)
                ilo = np.maximum(ilo, bound)
            elif s < 0:
                # i * s > t  <=>  i < t / s
                bound = _ceildiv(t, s) - 1 if strict else _floordiv(t, s)
                ihi = np.minimum(ihi, bound)
            else:
                ok &= (0 > t) if strict else (0 >= t)
        count = int(np.where(ok, np.maximum(ihi - ilo + 1, 0), 0).sum())
    model = hp.volume / lat.det
    per = hp.perimeter
    const = abs(count - model) / (per / lat.lambda1 + 1)
    return LatticeCount(count, model, lat.lambda1, per, const)


# --- the counts A(d1, d2) ----------------------------------------------------

def _form(g) -> FactoredBinaryForm:
    if isinstance(g, FactoredBinaryForm):
        return g
    if isinstance(g, BinaryForm):
        return FactoredBinaryForm(1, (g,), (1,))
    return FactoredBinaryForm.parse(str(g))


def _eval_mod(form: FactoredBinaryForm, a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    v = np.full(a.shape, form.unit % m, dtype=np.int64)
    for f, mult in zip(form.factors, form.multiplicities):
        w = np.full(a.shape, f.coeffs[0] % m, dtype=np.int64)
        bp = np.ones_like(b)
        for c in f.coeffs[1:]:
            bp = bp * b % m
            w = (w * a + (c % m) * bp) % m
        for _ in range(mult):
            v = v * w % m
    return v


def local_solutions(form: FactoredBinaryForm, m: int) -> np.ndarray:
    """All (u, v) mod m with m | form(u, v), as an array of shape (k, 2)."""
    if m == 1:
        return np.zeros((1, 2), dtype=np.int64)
    u, v = np.divmod(np.arange(m * m, dtype=np.int64), m)
    keep = _eval_mod(form, u, v, m) == 0
    return np.stack([u[keep], v[keep]], axis=1)


def _crt_pairs(sol1: np.ndarray, m1: int, sol2: np.ndarray, m2: int) -> np.ndarray:
    """Combine residues mod m1 and mod m2 (coprime) into residues mod m1*m2."""
    e1 = m2 * pow(m2, -1, m1) if m1 > 1 else 0
    e2 = m1 * pow(m1, -1, m2) if m2 > 1 else 0
    m = m1 * m2
    x = (sol1[:, None, :] * e1 + sol2[None, :, :] * e2) % m
    return x.reshape(-1, 2)


def rho_pair(g1, g2, d1: int, d2: int) -> int:
    """#{(u, v) mod d1*d2 : d1 | g1(u, v), d2 | g2(u, v)}."""
    _check_coprime(d1, d2, 1)
    f1, f2 = _form(g1), _form(g2)
    return len(local_solutions(f1, d1)) * len(local_solutions(f2, d2))


def _check_coprime(d1: int, d2: int, delta: int) -> None:
    if d1 < 1 or d2 < 1:
        raise DomainError("moduli must be positive")
    if math.gcd(d1, d2) != 1 or math.gcd(d1 * d2, delta) != 1:
        raise DomainError("need gcd(d1, d2) = gcd(d1 d2, Delta) = 1")


def _volume(region) -> float:
    return region.volume if isinstance(region, HalfPlanes) else region.volume()


def _rows(region):
    """Row indices 1..N and exact x-bounds per row; rows b <= 0 never meet a region."""
    rows = np.arange(1, region.N + 1, dtype=np.int64)
    amin, amax = region.row_bounds(rows)
    return rows, amin, amax


def _count_cosets(offsets: np.ndarray, M: int, region) -> int:
    """Points of the region lying in any coset offsets + M Z^2.

    This is the lattice count for M Z^2 done row by row: rows b = v0 mod M,
    then a = u0 mod M inside the exact x-bounds of the row.
    """
    total = 0
    _, amin, amax = _rows(region)
    for u0, v0 in offsets.tolist():
        first = v0 % M if v0 % M >= 1 else M
        bs = np.arange(first, region.N + 1, M) - 1
        lo, hi = amin[bs], amax[bs]
        c = _floordiv(hi - u0, M) - _ceildiv(lo - u0, M) + 1
        total += int(np.maximum(c, 0).sum())
    return total


def A_count(g1, g2, d1: int, d2: int, region, congruence: CongruenceClass) -> int:
    """Exact A(d1, d2) via residue classes mod d1*d2*Delta."""
    delta = congruence.modulus
    _check_coprime(d1, d2, delta)
    f1, f2 = _form(g1), _form(g2)
    sol = _crt_pairs(local_solutions(f1, d1), d1, local_solutions(f2, d2), d2)
    d = d1 * d2
    cls = np.array([[congruence.a0, congruence.b0]], dtype=np.int64)
    offsets = _crt_pairs(sol, d, cls, delta) if delta > 1 else sol
    return _count_cosets(offsets, d * delta, region)


def A_count_scan(g1, g2, d1: int, d2: int, region, congruence: CongruenceClass) -> int:
    """A(d1, d2) by checking every point of the class."""
    _check_coprime(d1, d2, congruence.modulus)
    f1, f2 = _form(g1), _form(g2)
    if isinstance(region, Region):
        a, b = class_points(region, congruence)
    else:
        a, b = _all_points(region)
        keep = (a % congruence.modulus == congruence.a0) & (b % congruence.modulus == congruence.b0)
        a, b = a[keep], b[keep]
    keep = (_eval_mod(f1, a % d1, b % d1, d1) == 0) & (_eval_mod(f2, a % d2, b % d2, d2) == 0)
    return int(keep.sum())


def _all_points(region):
    rows, amin, amax = _rows(region)
    counts = np.maximum(amax - amin + 1, 0)
    total = int(counts.sum())
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    a = np.repeat(amin, counts) + (np.arange(total, dtype=np.int64) - starts)
    return a, np.repeat(rows, counts)


@dataclass(frozen=True)
class Remainder:
    d1: int
    d2: int
    A: int
    rho: int
    model: float

    @property
    def r(self) -> float:
        return self.A - self.model


def r_remainder(g1, g2, d1: int, d2: int, region, congruence: CongruenceClass) -> Remainder:
    """r(d1, d2) = A(d1, d2) - rho(d1, d2) Vol / (d^2 Delta^2)."""
    A = A_count(g1, g2, d1, d2, region, congruence)
    rho = rho_pair(g1, g2, d1, d2)
    d, delta = d1 * d2, congruence.modulus
    return Remainder(d1, d2, A, rho, rho * _volume(region) / (d * d * delta * delta))


# --- remainder sums -----------------------------------------------------------

@dataclass
class LodReport:
    mode: str
    exponents: tuple
    N: list
    D1: list
    D2: list
    totals: list
    blocks: list  # per N: {"i,j": sum over 2^i <= d1 < 2^(i+1), 2^j <= d2 < 2^(j+1)}
    slope: Optional[float]
    rows: list = field(default_factory=list)  # (N, d1, d2, A, rho, model, r)
    region: dict = field(default_factory=dict)
    congruence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "exponents": list(self.exponents), "N": self.N,
                "D1": self.D1, "D2": self.D2, "totals": self.totals, "blocks": self.blocks,
                "fitted_slope": self.slope, "slope_threshold": 1.9,
                "note": "empirical smoke test, not a proof",
                "region": self.region, "congruence": self.congruence}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "d1", "d2", "A", "rho", "model", "r"])
        for row in self.rows:
            w.writerow([row[0], row[1], row[2], row[3], row[4], repr(row[5]), repr(row[6])])
        return buf.getvalue()


def has_linear_factor(form: FactoredBinaryForm) -> bool:
    return any(f.degree == 1 for f in form.factors)


def lod_sum_experiment(g1, g2, N_grid: Sequence[int], e1: float = 0.4, e2: float = 0.4,
                       delta: int = 1, a0: int = 0, b0: int = 0, mode: str = "corollary",
                       ratio=Fraction(1), window=Fraction(1, 2), workers: int = 1,
                       keep_rows: bool = True) -> LodReport:
    """Sum of |r(d1, d2)| over d1 <= N^e1, d2 <= N^e2 and its growth in N."""
    f1, f2 = _form(g1), _form(g2)
    if mode == "corollary":
        if has_linear_factor(f1):
            raise DomainError("g1 has a linear factor; use mode='linear'")
    elif mode != "linear":
        raise DomainError(f"unknown mode {mode!r}")
    cong = CongruenceClass(delta, a0 % delta, b0 % delta)
    Ns, D1s, D2s, totals, blocks, rows = [], [], [], [], [], []
    # local solutions depend only on d, not on N
    cache1: dict = {}
    cache2: dict = {}

    def sols(cache, f, d):
        if d not in cache:
            cache[d] = local_solutions(f, d)
        return cache[d]

    region0 = None
    for N in N_grid:
        region = Region(ratio, window, int(N))
        region0 = region
        D1 = max(1, math.floor(N ** e1 + 1e-9))
        D2 = max(1, math.floor(N ** e2 + 1e-9))
        vol = region.volume()
        pairs = [(d1, d2) for d1 in range(1, D1 + 1) for d2 in range(1, D2 + 1)
                 if math.gcd(d1, d2) == 1 and math.gcd(d1 * d2, delta) == 1]
        cls = np.array([[cong.a0, cong.b0]], dtype=np.int64)

        def one(pair):
            d1, d2 = pair
            s1, s2 = sols(cache1, f1, d1), sols(cache2, f2, d2)
            sol = _crt_pairs(s1, d1, s2, d2)
            d = d1 * d2
            offsets = _crt_pairs(sol, d, cls, delta) if delta > 1 else sol
            A = _count_cosets(offsets, d * delta, region)
            rho = len(s1) * len(s2)
            model = rho * vol / (d * d * delta * delta)
            return d1, d2, A, rho, model, A - model

        for d1 in range(1, D1 + 1):  # fill caches before any threading
            sols(cache1, f1, d1)
        for d2 in range(1, D2 + 1):
            sols(cache2, f2, d2)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                res = list(pool.map(one, pairs))
        else:
            res = [one(p) for p in pairs]
        total = 0.0
        blk: dict = {}
        for d1, d2, A, rho, model, r in res:
            total += abs(r)
            key = f"{d1.bit_length() - 1},{d2.bit_length() - 1}"
            blk[key] = blk.get(key, 0.0) + abs(r)
            if keep_rows:
                rows.append((int(N), d1, d2, A, rho, model, r))
        Ns.append(int(N))
        D1s.append(D1)
        D2s.append(D2)
        totals.append(total)
        blocks.append(dict(sorted(blk.items())))
    slope = None
    if len(Ns) >= 2 and all(t > 0 for t in totals):
        slope = float(np.polyfit(np.log(Ns), np.log(totals), 1)[0])
    return LodReport(mode, (e1, e2), Ns, D1s, D2s, totals, blocks, slope, rows,
                     region0.to_dict() if region0 else {}, cong.to_dict())
