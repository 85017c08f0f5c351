import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Poly, isprime, primerange, symbols

from sievekit.arith import (
    BinaryForm,
    FactoredBinaryForm,
    ParseError,
    PrimeRange,
    chebotarev_density,
    h_i_of_r,
    h_partial_sums,
    nu_of_p,
    nu_of_p_gcd,
    nu_of_p_scan,
    parse_polynomial,
    prime_pi,
    primes_array,
    primes_in,
    psi_k,
    rho_exhaustive,
    rho_i_of_p,
    rho_of,
    rho_of_pk,
    splitting_counts_batch,
    splitting_type,
    theta_estimate,
)
from sievekit.arith.chebotarev import ramified_primes
from sievekit.arith.polys import polynomial_to_string
from sievekit.arith.primes import prime_segments
from sievekit.selfcheck import COUNTING_FORMS, psi_equivalence_failures
from sievekit.specfun import DomainError


def naive_sieve(n):
    flags = bytearray([1]) * (n + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(n ** 0.5) + 1):
        if flags[i]:
            flags[i * i::i] = bytearray(len(flags[i * i::i]))
    return [i for i, f in enumerate(flags) if f]


# --- primes -------------------------------------------------------------------

def test_primes_examples():
    assert list(primes_in(PrimeRange(2, 20))) == [2, 3, 5, 7, 11, 13, 17, 19]
    assert list(primes_in(PrimeRange(2, 20, frozenset({2, 5})))) == [3, 7, 11, 13, 17, 19]
    assert prime_pi(10 ** 6) == 78498 == len(naive_sieve(10 ** 6))


def test_segments_match_naive_sieve():
    ref = [p for p in naive_sieve(50_000) if p >= 1000]
    got = np.concatenate(list(prime_segments(1000, 50_000, segment=777))).tolist()
    assert got == ref
    assert primes_array(PrimeRange(10 ** 12, 10 ** 12 + 100)).tolist() == \
        [p for p in range(10 ** 12, 10 ** 12 + 101) if isprime(p)]


def test_prime_range_validation():
    with pytest.raises(ValueError):
        PrimeRange(10, 2)
    with pytest.raises(ValueError):
        PrimeRange(2, 2 ** 64)


# --- parsing ------------------------------------------------------------------

def test_parse_examples():
    assert parse_polynomial("x^3-2") == (1, 0, 0, -2)
    assert parse_polynomial("2x^2 + 3x") == (2, 3, 0)
    assert FactoredBinaryForm.parse("x^2-2y^2").factors[0].coeffs == (1, 0, -2)
    f = FactoredBinaryForm.parse("(x^2-2y^2)(-x^2+3y^2)")
    assert f.unit == -1 and [g.coeffs for g in f.factors] == [(1, 0, -3), (1, 0, -2)]
    assert f.bad_primes() == [2, 3]
    g = FactoredBinaryForm.parse("y*(x^3-3y^3)")
    assert g.has_y_factor and g.degree == 4
    sq = FactoredBinaryForm.parse("x^2*y")
    assert dict(zip((str(g) for g in sq.factors), sq.multiplicities)) == {"x": 2, "y": 1}


@pytest.mark.parametrize("bad", ["", "x^2+z", "x^2+1/2", "import os", "x^^2", "0"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_polynomial(bad)


def test_non_homogeneous_form_rejected():
    with pytest.raises(ParseError):
        FactoredBinaryForm.parse("x^2+y")


@settings(max_examples=40)
@given(st.lists(st.integers(-9, 9), min_size=2, max_size=6).filter(lambda c: c[0] != 0))
def test_polynomial_round_trip(coeffs):
    assert parse_polynomial(polynomial_to_string(coeffs)) == tuple(coeffs)


@settings(max_examples=40)
@given(st.lists(st.integers(-9, 9), min_size=2, max_size=5).filter(any))
def test_binary_form_string_round_trip(coeffs):
    f = BinaryForm(tuple(coeffs))
    x, y = symbols("x y")
    parsed = FactoredBinaryForm.parse(str(f))
    assert Poly(parsed.unit * math.prod(g.sympy_expr() ** m for g, m in
                                        zip(parsed.factors, parsed.multiplicities)), x, y) \
        == Poly(f.sympy_expr(), x, y)


# --- nu and rho ---------------------------------------------------------------

def test_nu_examples():
    y = BinaryForm((0, 1))
    assert all(nu_of_p(y, p) == 1 for p in (2, 3, 5, 101, 10007))
    f = BinaryForm((1, 0, -2))
    assert nu_of_p(f, 7) == 2 and nu_of_p(f, 3) == 0
    assert nu_of_p(BinaryForm((1, 0, 0, -2)), 31) >= 1


def test_nu_scan_equals_gcd_path():
    for text in COUNTING_FORMS:
        for f in FactoredBinaryForm.parse(text).factors:
            for p in [p for p in range(2, 200) if isprime(p)] + [10007, 10009]:
                assert nu_of_p_scan(f, p) == nu_of_p_gcd(f, p)


def test_rho_examples():
    y = BinaryForm((0, 1))
    assert all(rho_i_of_p(y, p) == p == rho_exhaustive(y, p) for p in (2, 3, 5, 7))
    f = BinaryForm((1, 0, -2))
    assert rho_i_of_p(f, 7) == 13 == rho_exhaustive(f, 7)


def test_rho_identity_over_counting_forms():
    for text in COUNTING_FORMS[:5]:
        form = FactoredBinaryForm.parse(text)
        for p in (2, 3, 5, 7, 11, 13, 53, 97):
            assert rho_i_of_p(form, p) == rho_exhaustive(form, p)


def test_rho_multiplicative():
    f = FactoredBinaryForm.parse("x^2+y^2")
    for d1 in range(1, 21):
        for d2 in range(1, 21):
            if math.gcd(d1, d2) == 1:
                assert rho_exhaustive(f, d1 * d2) == rho_exhaustive(f, d1) * rho_exhaustive(f, d2)


def test_rho_lifting_against_exhaustive():
    for text in ("x^2+y^2", "x^3-2y^3", "y*(x^2-2y^2)"):
        f = FactoredBinaryForm.parse(text)
        bad = set(f.bad_primes())
        for p in (3, 5, 7, 11, 13):
            if p in bad:
                continue
            for k in range(1, 5):
                if p ** k <= 1500:
                    assert rho_of_pk(f, p, k) == rho_exhaustive(f, p ** k), (text, p, k)
        assert rho_of(f, 2 * 9 * 5) == rho_exhaustive(f, 90)


def test_rho_lifting_refuses_bad_primes():
    f = FactoredBinaryForm.parse("x^2-2y^2")
    with pytest.raises(DomainError):
        rho_of_pk(f, 2, 3)
    with pytest.raises(DomainError):
        rho_of_pk(f, 7, 2, S=[7])


def test_psi_examples():
    assert psi_k(8, 3) == 2
    assert psi_k(12, 2) == 6
    for d in (1, 6, 30, 2310):
        assert all(psi_k(d, k) == d for k in range(1, 6))
    assert psi_equivalence_failures(2000) == []


@given(st.integers(1, 3000), st.integers(1, 3000), st.integers(1, 4))
def test_psi_multiplicative(a, b, k):
    if math.gcd(a, b) == 1:
        assert psi_k(a * b, k) == psi_k(a, k) * psi_k(b, k)


def test_h_examples():
    f = BinaryForm((1, 0, -2))
    assert h_i_of_r(f, 1) == 1
    for p in (3, 5, 11):
        assert nu_of_p(f, p) == 0
        assert h_i_of_r(f, p) == Fraction(1, p * p - 1)
    assert h_i_of_r(f, 3, S=[3]) == 0
    assert h_i_of_r(f, 3, in_P=lambda p: p % 4 == 3) == 0
    assert h_i_of_r(f, 9) == 0
    assert h_i_of_r(f, 9, squarefree_only=False) > 0


def test_h_partial_sum_growth():
    f = BinaryForm((1, 0, -2))
    sums = h_partial_sums(f, 10 ** 6, lambda ps: ps % 4 == 3, S=[2])
    xs = np.array([10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])
    slope = np.polyfit(np.log(np.log(xs)), np.log(sums[xs]), 1)[0]
    assert abs(slope - 0.5) < 0.1
    # partial sums agree with the exact rational definition
    exact = sum(h_i_of_r(f, r, S=[2], in_P=lambda p: p % 4 == 3) for r in range(1, 301))
    assert abs(sums[300] - float(exact)) < 1e-12


# --- splitting types and densities ---------------------------------------------

def test_splitting_type_examples():
    assert splitting_type((1, 0, 0, -2), 5).parts == (2, 1)
    assert 1 in splitting_type((1, 0, 0, -2), 31).parts
    for p in (2, 3, 101):
        assert splitting_type((1, -5), p).parts == (1,)
    with pytest.raises(DomainError):
        splitting_type((1, 0, 0, -2), 3)
    with pytest.raises(DomainError):
        splitting_type((1, 0, -2), 9)


def test_prime_degree_no_root_means_inert():
    g = (1, 0, 0, 0, 0, -2)
    bad = set(ramified_primes(g))
    for p in [p for p in range(3, 2000) if isprime(p) and p not in bad]:
        t = splitting_type(g, p)
        assert sum(t.parts) == 5
        assert (1 not in t.parts) == (t.parts == (5,))


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=4, max_size=6), st.integers(0, 10 ** 6))
def test_batched_counts_match_single_prime(tail, seed):
    g = (1,) + tuple(tail)
    if Poly(list(g), symbols("x")).discriminant() == 0:
        return
    bad = set(ramified_primes(g))
    rng = np.random.default_rng(seed)
    pool = [p for p in range(3, 5000) if isprime(p) and p not in bad]
    primes = np.array(sorted(rng.choice(pool, 25, replace=False)), dtype=np.int64)
    counts = splitting_counts_batch(g, primes)
    for row, p in zip(counts, primes.tolist()):
        parts = splitting_type(g, p).parts
        assert all(row[e] == parts.count(e) for e in range(1, len(g)))


def test_density_examples():
    assert chebotarev_density((1, -1), "all", 10 ** 4).estimate == 1.0
    est = chebotarev_density((1, 0, 0, -2), "no-root", 10 ** 5)
    assert est.contains(1 / 3)
    assert chebotarev_density((1, 0, -2), "inert", 10 ** 5).contains(0.5)
    with pytest.raises(DomainError):
        chebotarev_density((1, 0, -2), "inert", 10 ** 9)


@pytest.mark.slow
def test_density_converges():
    for g, pred in [((1, 0, -2), "inert"), ((1, 0, 0, -2), "no-root")]:
        small = chebotarev_density(g, pred, 10 ** 6)
        big = chebotarev_density(g, pred, 10 ** 7)
        assert small.contains(big.estimate)


def test_theta_examples():
    y = FactoredBinaryForm.parse("y")
    th = theta_estimate(y, lambda ps: ps % 4 == 3, 10 ** 4)
    assert th.theta[0].estimate == 1.0
    q = FactoredBinaryForm.parse("x^2+y^2+x*y")
    th = theta_estimate(q, lambda ps: np.ones(len(ps), dtype=bool), 10 ** 6)
    assert th.alpha.estimate == 1.0 and th.theta[0].contains(1.0)
    with pytest.raises(DomainError):
        theta_estimate(q, lambda ps: np.zeros(len(ps), dtype=bool), 10 ** 4)



def _rho_ratios(text):
    f = FactoredBinaryForm.parse(text)
    d, bad = f.degree, set(f.bad_primes())
    for p in primerange(2, 10 ** 4):
        if p in bad:
            continue
        a = 1
        while p ** a <= 10 ** 4:
            yield a, rho_of_pk(f, p, a) / p ** (2 * a * (1 - 1 / d))
            a += 1


@pytest.mark.parametrize("text", ["x^3-2y^3", "x^4-2y^4", "x^5+3y^5", "x^3+x^2y-2xy^2-y^3"])
def test_prime_power_rho_bounded_for_degree_three_and_up(text):
    # rho(p^a) / p^(2a(1-1/d)) stays bounded over every good p^a <= 10^4
    assert max(r for _, r in _rho_ratios(text)) < 1.5


def test_prime_power_rho_quadratic_grows_linearly_in_exponent():
    ratios = list(_rho_ratios("x^2+y^2"))
    assert max(r for _, r in ratios) >= 4 > 2 >= max(r for a, r in ratios if a == 1)
    assert max(r / (a + 1) for a, r in ratios) <= 1
