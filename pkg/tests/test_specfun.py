import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from sievekit.specfun import (
    EULER_GAMMA,
    CertifiedValue,
    DomainError,
    Integrand,
    e1_array,
    exp_integral_Ei_neg,
    gamma,
    integrate_certified,
    log_gamma,
    riemann_bracket,
)

# mpmath at 30 digits
EI_M1 = -0.21938393439552027367716377546
EI_MHALF = -0.559773594776160811746795939315

finite = st.floats(-1e3, 1e3, allow_nan=False)
radius = st.floats(0, 10, allow_nan=False)


def test_ei_reference_values():
    for z, ref in [(1.0, EI_M1), (0.5, EI_MHALF)]:
        v = exp_integral_Ei_neg(z)
        assert v.error_radius <= 1e-12
        assert abs(v.value - ref) <= v.error_radius + 1e-15
    assert exp_integral_Ei_neg(0.5).value < exp_integral_Ei_neg(1.0).value


def test_ei_far_tail():
    assert abs(exp_integral_Ei_neg(50.0).value) < 1e-23
    for z in (30.0, 40.0, 50.0):
        scaled = exp_integral_Ei_neg(z).value * math.exp(z) * z
        assert abs(scaled + 1) < 0.05


def test_ei_against_scipy_across_branch_point():
    z = np.concatenate([np.linspace(0.01, 4.99, 60), np.linspace(5.0, 60, 60)])
    vals, errs = e1_array(z)
    ref = special.exp1(z)
    assert np.all(np.abs(vals - ref) <= errs + 4e-16 * np.abs(ref))
    # the two branches agree where either could be used
    v3, e3 = e1_array(z, branch=3.0)
    v8, e8 = e1_array(z, branch=8.0)
    assert np.all(np.abs(v3 - v8) <= e3 + e8)
    near = (z > 4) & (z < 6)
    assert np.max(np.abs(v3 - v8)[near]) < 1e-12


def test_ei_domain():
    with pytest.raises(DomainError):
        exp_integral_Ei_neg(0.0)
    with pytest.raises(DomainError):
        exp_integral_Ei_neg(-1.0)


def test_gamma_values():
    assert gamma(1.0).contains(1.0)
    assert gamma(2.0).contains(1.0)
    assert gamma(1.5).contains(math.sqrt(math.pi) / 2)
    assert gamma(6.0).contains(120.0)
    for x in (0.3, 0.61, 1.7, 3.3, 10.5):
        lg = log_gamma(x)
        assert lg.error_radius <= 1e-12
        assert abs(lg.value - math.lgamma(x)) <= lg.error_radius + 1e-15
    with pytest.raises(DomainError):
        log_gamma(0.0)


def test_euler_gamma_stored():
    assert EULER_GAMMA == 0.5772156649015329


def _encloses(c: CertifiedValue, exact: Fraction) -> bool:
    mid, rad = Fraction(c.value), Fraction(c.error_radius)
    return mid - rad <= exact <= mid + rad


def _corners(c: CertifiedValue):
    mid, rad = Fraction(c.value), Fraction(c.error_radius)
    return (mid - rad, mid, mid + rad)


@given(finite, radius, finite, radius)
def test_interval_arithmetic_encloses(a, ra, b, rb):
    x, y = CertifiedValue(a, ra), CertifiedValue(b, rb)
    for cx in _corners(x):
        for cy in _corners(y):
            assert _encloses(x + y, cx + cy)
            assert _encloses(x - y, cx - cy)
            assert _encloses(x * y, cx * cy)


@given(st.floats(0.5, 100), st.floats(0, 0.2), st.floats(0.5, 100), st.floats(0, 0.2))
def test_division_encloses(a, ra, b, rb):
    x, y = CertifiedValue(a, ra), CertifiedValue(b, rb)
    for cx in (x.lo, x.hi):
        for cy in (y.lo, y.hi):
            assert (x / y).contains(cx / cy)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        CertifiedValue(1.0, -1e-3)


def test_integral_of_exponential():
    ig = Integrand(lambda z: np.exp(-z), monotone="decreasing", convex=True,
                   tail_bound=lambda Z: math.exp(-Z))
    v = integrate_certified(ig, 0.0, math.inf, tol=1e-10)
    assert v.contains(1.0)
    assert v.error_radius <= 1e-9


def test_log_two_integral():
    ig = Integrand(lambda s: 1.0 / s, monotone="decreasing", convex=True)
    v = integrate_certified(ig, 1.0, 2.0, tol=1e-10)
    assert v.contains(math.log(2))
    assert v.error_radius <= 1e-9


def test_singular_head_against_scipy():
    def f(u):
        return u ** -0.3 / (2 - u)
    ig = Integrand(f, convex=True, head_factor=lambda u: 1.0 / (2 - u),
                   head_limit=0.5, rel_err=0.0)
    v = integrate_certified(ig, 0.0, 1.0, singularity_hint=0.3, tol=1e-9)
    ref, err = integrate.quad(f, 0, 1, epsabs=1e-13, limit=200)
    assert abs(v.value - ref) <= v.error_radius + err
    assert abs(ref - 0.936005896140298) < 1e-10


def test_non_integrable_head_rejected():
    ig = Integrand(lambda z: 1.0 / z, monotone="decreasing")
    with pytest.raises(DomainError):
        integrate_certified(ig, 0.0, 1.0, singularity_hint=1.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3), st.integers(4, 200))
def test_riemann_bracket_and_refinement(c, n):
    def f(z):
        return np.exp(-c * z)
    true = (1 - math.exp(-2 * c)) / c
    lo, hi = riemann_bracket(f, 0.0, 2.0, n)
    lo2, hi2 = riemann_bracket(f, 0.0, 2.0, 2 * n)
    assert lo <= true <= hi
    assert hi2 - lo2 <= hi - lo
    assert max(lo, lo2) <= min(hi, hi2)
