"""Local counting functions of binary forms: nu, rho, psi_k and h_i.

nu(p) counts projective roots of a form over F_p, rho(m) counts pairs
(a, b) mod m with m | f(a, b).
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

import numpy as np
from sympy import factorint, isprime

from ..specfun import DomainError
from .polys import BinaryForm, FactoredBinaryForm, count_roots_fp, to_fp

SCAN_LIMIT = 10_000

FormLike = Union[BinaryForm, FactoredBinaryForm]


def _factors(form: FormLike) -> list:
    if isinstance(form, BinaryForm):
        return [form]
    return list(form.factors)


def _require_prime(p: int) -> None:
    if not isprime(p):
        raise DomainError(f"{p} is not prime")


def nu_of_p_scan(f: BinaryForm, p: int) -> int:
    """Projective root count by evaluating f(t, 1) on all of F_p."""
    t = np.arange(p, dtype=np.int64)
    v = np.zeros(p, dtype=np.int64)
    for c in f.coeffs:
        v = (v * t + c % p) % p
    return int(np.count_nonzero(v == 0)) + (f.leading_x % p == 0)


def nu_of_p_gcd(f: BinaryForm, p: int) -> int:
    """Projective root count via deg gcd(x^p - x, f(x, 1)) over F_p."""
    g = to_fp(f.coeffs, p)
    return count_roots_fp(g, p) + (f.leading_x % p == 0)


def nu_of_p(form: FormLike, p: int) -> int:
    """Number of [x:y] in P^1(F_p) where the form vanishes.

    For a factored form this is the number of distinct projective roots of
    the product, which equals the sum over factors off the bad primes.
    """
    _require_prime(p)
    factors = _factors(form)
    if len(factors) == 1:
        f = factors[0]
        return nu_of_p_scan(f, p) if p < SCAN_LIMIT else nu_of_p_gcd(f, p)
    if isinstance(form, FactoredBinaryForm) and p not in form.bad_primes():
        return sum(nu_of_p(f, p) for f in factors)
    return _nu_product_scan(factors, p)


def _nu_product_scan(factors: list, p: int) -> int:
    t = np.arange(p, dtype=np.int64)
    zero = np.zeros(p, dtype=bool)
    inf = False
    for f in factors:
        v = np.zeros(p, dtype=np.int64)
        for c in f.coeffs:
            v = (v * t + c % p) % p
        zero |= v == 0
        inf |= f.leading_x % p == 0
    return int(zero.sum()) + inf


def rho_exhaustive(form: FormLike, m: int) -> int:
    """#{(a, b) mod m : m | f(a, b)} by direct enumeration."""
    if m < 1:
        raise DomainError("modulus must be positive")
    factors = _factors(form)
    mults = [1] * len(factors)
    unit = 1
    if isinstance(form, FactoredBinaryForm):
        mults = list(form.multiplicities)
        unit = form.unit
    b = np.arange(m, dtype=np.int64)
    count = 0
    for a in range(m):
        av = np.full(m, a, dtype=np.int64)
        v = np.full(m, unit % m, dtype=np.int64)
        for f, mu in zip(factors, mults):
            fv = _eval_mod(f, av, b, m)
            for _ in range(mu):
                v = v * fv % m
        count += int(np.count_nonzero(v == 0))
    return count


def _eval_mod(f: BinaryForm, a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    v = np.full(a.shape, f.coeffs[0] % m, dtype=np.int64)
    bp = np.ones_like(b)
    for c in f.coeffs[1:]:
        bp = bp * b % m
        v = (v * a + (c % m) * bp) % m
    return v


def rho_i_of_p(f: FormLike, p: int) -> int:
    """rho(p) = nu(p)(p - 1) + 1: each projective root gives p - 1 pairs, plus (0, 0)."""
    _require_prime(p)
    return nu_of_p(f, p) * (p - 1) + 1


def rho_of_pk(form: FormLike, p: int, k: int, S: Iterable[int] = ()) -> int:
    """rho(p^k) by lifting simple roots, valid for p outside S and the bad primes.

    Pairs not both divisible by p lie over the nu(p) simple projective roots,
    each lifting to phi(p^k) pairs; pairs with p | a, b reduce to level k - d.
    """
    _require_prime(p)
    if k < 0:
        raise DomainError("exponent must be non-negative")
    S = set(S)
    fac = form if isinstance(form, FactoredBinaryForm) else FactoredBinaryForm(1, (form,), (1,))
    if p in S or p in fac.bad_primes() or any(m > 1 for m in fac.multiplicities) \
            or fac.unit % p == 0:
        raise DomainError(f"lifting path needs p={p} outside S and the bad primes")
    return _rho_lift(nu_of_p(fac, p), fac.degree, p, k)


def _rho_lift(nu: int, d: int, p: int, k: int) -> int:
    if k == 0:
        return 1
    primitive = nu * p ** (k - 1) * (p - 1)
    if k <= d:
        return primitive + p ** (2 * (k - 1))
    return primitive + p ** (2 * (d - 1)) * _rho_lift(nu, d, p, k - d)


def rho_of(form: FormLike, m: int, S: Iterable[int] = ()) -> int:
    """rho(m) by multiplicativity, lifting where valid and enumerating otherwise."""
    S = set(S)
    out = 1
    for p, k in sorted(factorint(m).items()):
        try:
            out *= rho_of_pk(form, p, k, S)
        except DomainError:
            if p ** k > SCAN_LIMIT:
                raise
            out *= rho_exhaustive(form, p ** k)
    return out


def psi_k(d: int, k: int) -> int:
    """Multiplicative map p^r -> p^ceil(r/k)."""
    if d < 1 or k < 1:
        raise DomainError("psi_k needs d >= 1 and k >= 1")
    return math.prod(p ** (-(-r // k)) for p, r in factorint(d).items())


def h_i_of_r(f: FormLike, r: int, S: Iterable[int] = (),
             in_P: Optional[Callable[[int], bool]] = None,
             squarefree_only: bool = True) -> Fraction:
    """h_i(r) = rho_i(r)/r^2 prod_{p | r} (1 - rho_i(p)/p^2)^(-1).

    Zero unless every prime of r avoids S and the sifting set (``in_P``).
    With ``squarefree_only`` the function is also zero off squarefree r;
    otherwise prime powers use rho_i(p^a)/p^(2a) with the same correction.
    """
    if r < 1:
        raise DomainError("r must be positive")
    S = set(S)
    out = Fraction(1)
    for p, a in factorint(r).items():
        if p in S or (in_P is not None and in_P(p)):
            return Fraction(0)
        if a > 1 and squarefree_only:
            return Fraction(0)
        rp = rho_i_of_p(f, p)
        rpa = rp if a == 1 else rho_of(f, p ** a, S)
        out *= Fraction(rpa, p ** (2 * a)) / (1 - Fraction(rp, p * p))
    return out


def h_partial_sums(f: BinaryForm, x_max: int, in_P_mask: Callable[[np.ndarray], np.ndarray],
                   S: Iterable[int] = ()) -> np.ndarray:
    """Cumulative sums of h_i over squarefree r <= x_max, as floats.

    Entry n of the result is the sum over r <= n.
    """
    from .chebotarev import nu_batch
    from .primes import small_primes
    ps = small_primes(x_max)
    excluded = np.isin(ps, np.array(sorted(set(S)), dtype=np.int64)) | in_P_mask(ps)
    rho = nu_batch(f, ps).astype(float) * (ps - 1) + 1
    g = rho / ps.astype(float) ** 2
    hp = g / (1 - g)
    # multiplicative sieve over squarefree r with all primes allowed
    val = np.zeros(x_max + 1)
    val[1:] = 1.0
    for p, bad, h in zip(ps.tolist(), excluded.tolist(), hp.tolist()):
        if bad:
            val[p::p] = 0.0
            continue
        val[p::p] *= h
        if p * p <= x_max:
            val[p * p::p * p] = 0.0
    return np.cumsum(val)
