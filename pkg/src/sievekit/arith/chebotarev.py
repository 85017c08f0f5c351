"""Splitting types of polynomials mod p and empirical Chebotarev densities.

Splitting types over many primes are computed in batch: with M the matrix
of Frobenius on F_p[x]/(g), dim ker(M^i - 1) = sum_j gcd(i, d_j) over the
factor degrees d_j, and these kernel dimensions determine the d_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np
import sympy
from sympy import isprime, primefactors

from ..permdens import CycleType, mobius
from ..specfun import DomainError
from .counting import SCAN_LIMIT, nu_of_p_gcd, nu_of_p_scan
from .polys import (
    X,
    BinaryForm,
    FactoredBinaryForm,
    batch_monic,
    batch_mulmod,
    batch_powmod_x,
    batch_rank,
    ddf_degrees,
    to_fp,
)
from .primes import PrimeRange, primes_array

X_MAX = 10 ** 8
BATCH_PRIME_MAX = 2 ** 31


@dataclass(frozen=True)
class DensityEstimate:
    numerator: int
    denominator: int
    estimate: float
    half_width: float

    def contains(self, target: float) -> bool:
        return abs(self.estimate - target) <= self.half_width

    def to_dict(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator,
                "estimate": self.estimate, "half_width": self.half_width}


def binomial_estimate(k: int, n: int, sigmas: float = 3.0) -> DensityEstimate:
    if n <= 0:
        raise DomainError("no samples")
    est = k / n
    return DensityEstimate(int(k), int(n), est, sigmas * math.sqrt(est * (1 - est) / n))


def mean_estimate(values: np.ndarray, sigmas: float = 3.0) -> DensityEstimate:
    n = len(values)
    if n == 0:
        raise DomainError("no samples")
    est = float(values.mean())
    sd = float(values.std(ddof=1)) if n > 1 else 0.0
    return DensityEstimate(int(values.sum()), n, est, sigmas * sd / math.sqrt(n))


# --- single-prime path ----------------------------------------------------

def poly_discriminant(g: Sequence[int]) -> int:
    if len(g) <= 2:
        return 1
    return int(sympy.discriminant(sympy.Poly(list(g), X), X))


def ramified_primes(g: Sequence[int]) -> list:
    """Primes dividing disc(g) or the leading coefficient."""
    return list(_ramified(tuple(int(c) for c in g)))


@lru_cache(maxsize=256)
def _ramified(g: tuple) -> tuple:
    bad = abs(poly_discriminant(g) * g[0])
    return tuple(sorted(int(q) for q in primefactors(bad)))


def splitting_type(g: Sequence[int], p: int) -> CycleType:
    """Degrees of the irreducible factors of g mod p (leading coefficient first)."""
    if not isprime(p):
        raise DomainError(f"{p} is not prime")
    if len(g) < 2:
        raise DomainError("polynomial must have positive degree")
    if p in _ramified(tuple(int(c) for c in g)):
        raise DomainError(f"ramified: p={p} divides the discriminant or leading coefficient")
    return CycleType(tuple(ddf_degrees(to_fp(g, p), p)))


# --- batched path -----------------------------------------------------------

def _batch_matmul(a: np.ndarray, b: np.ndarray, p: np.ndarray) -> np.ndarray:
    pc = p[:, None, None]
    n = a.shape[1]
    out = np.zeros_like(a)
    for k in range(n):
        out = (out + a[:, :, k:k + 1] * b[:, k:k + 1, :] % pc) % pc
    return out


def frobenius_matrices(g: Sequence[int], primes: np.ndarray) -> np.ndarray:
    """Matrix of h -> h^p on F_p[x]/(g) in the basis 1, x, ..., x^(d-1)."""
    gm = batch_monic(g, primes)
    P, d1 = gm.shape
    d = d1 - 1
    h1 = batch_powmod_x(gm, primes, primes.copy())
    m = np.zeros((P, d, d), dtype=np.int64)
    col = np.zeros((P, d), dtype=np.int64)
    col[:, 0] = 1
    for j in range(d):
        m[:, :, j] = col
        if j + 1 < d:
            col = batch_mulmod(col, h1, gm, primes)
    return m


def splitting_counts_batch(g: Sequence[int], primes: np.ndarray) -> np.ndarray:
    """counts[i, e] = number of degree-e factors of g mod primes[i].

    Every prime must be unramified for g and below 2^31.
    """
    primes = np.asarray(primes, dtype=np.int64)
    d = len(g) - 1
    P = len(primes)
    counts = np.zeros((P, d + 1), dtype=np.int64)
    if P == 0:
        return counts
    if d == 1:
        counts[:, 1] = 1
        return counts
    if primes.max() >= BATCH_PRIME_MAX:
        raise DomainError("batched path needs primes below 2^31")
    m = frobenius_matrices(g, primes)
    eye = np.broadcast_to(np.eye(d, dtype=np.int64), m.shape)
    kernel = np.zeros((P, d + 1), dtype=np.int64)  # kernel[:, i] = sum_j gcd(i, d_j)
    power = m.copy()
    for i in range(1, d + 1):
        if i > 1:
            power = _batch_matmul(power, m, primes)
        kernel[:, i] = d - batch_rank((power - eye) % primes[:, None, None], primes)
    # phi(t) M_t = sum_{s | t} mu(t/s) kernel_s, with M_t = #{j : t | d_j}
    M = np.zeros((P, d + 1), dtype=np.int64)
    for t in range(1, d + 1):
        acc = sum(mobius(t // s) * kernel[:, s] for s in range(1, t + 1) if t % s == 0)
        M[:, t] = acc // _phi(t)
    for e in range(1, d + 1):
        counts[:, e] = sum(mobius(k // e) * M[:, k] for k in range(e, d + 1, e))
    return counts


def _phi(n: int) -> int:
    return int(sympy.totient(n))


def _gcd_of_parts(counts: np.ndarray) -> np.ndarray:
    out = np.zeros(len(counts), dtype=np.int64)
    for e in range(1, counts.shape[1]):
        out = np.where(counts[:, e] > 0, np.gcd(out, e), out)
    return out


# named predicates act on count matrices; each has a CycleType twin
PREDICATES = {
    "no-root": (lambda c: c[:, 1] == 0, lambda t: 1 not in t.parts),
    "has-root": (lambda c: c[:, 1] > 0, lambda t: 1 in t.parts),
    "split": (lambda c: c[:, 1] == c.shape[1] - 1, lambda t: set(t.parts) == {1}),
    "inert": (lambda c: c[:, -1] == 1, lambda t: len(t.parts) == 1),
    "non-coprime": (lambda c: _gcd_of_parts(c) > 1, lambda t: t.gcd > 1),
    "all": (lambda c: np.ones(len(c), dtype=bool), lambda t: True),
}

Predicate = Union[str, Callable[[CycleType], bool]]


def predicate_mask(counts: np.ndarray, predicate: Predicate) -> np.ndarray:
    if isinstance(predicate, str):
        if predicate not in PREDICATES:
            raise DomainError(f"unknown predicate {predicate!r}; choose from {sorted(PREDICATES)}")
        return PREDICATES[predicate][0](counts)
    out = np.zeros(len(counts), dtype=bool)
    for i, row in enumerate(counts):
        parts = [e for e in range(1, len(row)) for _ in range(int(row[e]))]
        out[i] = bool(predicate(CycleType(tuple(parts))))
    return out


def split_condition_mask(g: Sequence[int], predicate: Predicate, primes: np.ndarray) -> np.ndarray:
    """Whether each prime is unramified for g with splitting type satisfying the predicate."""
    primes = np.asarray(primes, dtype=np.int64)
    ram = np.isin(primes, np.array(ramified_primes(g), dtype=np.int64))
    out = np.zeros(len(primes), dtype=bool)
    batch = ~ram & (primes < BATCH_PRIME_MAX)
    if batch.any():
        out[batch] = predicate_mask(splitting_counts_batch(g, primes[batch]), predicate)
    single = PREDICATES[predicate][1] if isinstance(predicate, str) else predicate
    for i in np.flatnonzero(~ram & ~batch):
        out[i] = bool(single(splitting_type(g, int(primes[i]))))
    return out


def chebotarev_density(g: Sequence[int], predicate: Predicate, X: int) -> DensityEstimate:
    """Share of unramified primes <= X whose splitting type satisfies the predicate."""
    if X > X_MAX:
        raise DomainError(f"X={X} above the runtime guard {X_MAX}")
    primes = primes_array(PrimeRange(2, X, frozenset(ramified_primes(g))))
    mask = predicate_mask(splitting_counts_batch(g, primes), predicate)
    return binomial_estimate(int(mask.sum()), len(primes))


# --- nu over many primes -----------------------------------------------------

def nu_batch(f: BinaryForm, primes: np.ndarray) -> np.ndarray:
    """nu(p) for each prime, batched where g = f(x, 1) is squarefree mod p."""
    primes = np.asarray(primes, dtype=np.int64)
    g = f.dehomogenized()
    inf = (np.int64(f.leading_x) % primes == 0).astype(np.int64) if f.leading_x else \
        np.ones(len(primes), dtype=np.int64)
    if len(g) == 1:
        return inf
    bad = np.isin(primes, np.array(ramified_primes(g), dtype=np.int64)) | (primes >= BATCH_PRIME_MAX)
    out = np.zeros(len(primes), dtype=np.int64)
    good = ~bad
    if good.any():
        out[good] = splitting_counts_batch(g, primes[good])[:, 1] + inf[good]
    for i in np.flatnonzero(bad):
        p = int(primes[i])
        out[i] = nu_of_p_scan(f, p) if p < SCAN_LIMIT else nu_of_p_gcd(f, p)
    return out


# --- sieve densities -----------------------------------------------------------

@dataclass(frozen=True)
class ThetaReport:
    X: int
    alpha: DensityEstimate
    theta: tuple  # DensityEstimate per factor
    factors: tuple  # factor strings

    @property
    def kappa(self) -> float:
        return self.alpha.estimate * sum(t.estimate for t in self.theta)

    def to_dict(self) -> dict:
        return {"X": self.X, "alpha": self.alpha.to_dict(),
                "theta": [t.to_dict() for t in self.theta],
                "factors": list(self.factors), "alpha_theta": self.kappa}


def theta_estimate(form: FactoredBinaryForm, in_P_mask: Callable[[np.ndarray], np.ndarray],
                   X: int, S: Sequence[int] = ()) -> ThetaReport:
    """alpha = #P(X)/pi(X) and theta_i = mean of nu_i over P(X)."""
    if X > X_MAX:
        raise DomainError(f"X={X} above the runtime guard {X_MAX}")
    primes = primes_array(PrimeRange(2, X))
    inP = in_P_mask(primes) & ~np.isin(primes, np.array(sorted(set(S)), dtype=np.int64))
    sel = primes[inP]
    if len(sel) == 0:
        raise DomainError("sifting set has no primes up to X")
    alpha = binomial_estimate(len(sel), len(primes))
    thetas = tuple(mean_estimate(nu_batch(f, sel)) for f in form.factors)
    return ThetaReport(X, alpha, thetas, tuple(str(f) for f in form.factors))
