"""Beta-sieve constants for small dimension and the threshold equations.

For 0 <= kappa < 1/2 the upper and lower beta-sieve constants are

    A = 2 e^{gamma kappa} / Gamma(1 - kappa) * q / (p + q),
    B = 2 e^{gamma kappa} / (p + q),

with p, q integrals of z^{-kappa} exp(-z -/+ kappa Ei(-z)) over (0, inf).
The admissible sieve dimension in each application is the root of a
decreasing function built from r = B / A; :func:`solve_threshold` locates
it by bisection on certified values.
"""
from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .specfun import (
    EULER_GAMMA,
    CertifiedValue,
    DomainError,
    Integrand,
    e1_array,
    ein_array,
    gamma,
    integrate_certified,
)

KAPPA_MAX = 0.5
# relative evaluation error allowed for integrands built on e1_array
_E1_REL = 1e-12

VARIANTS = ("quadratic-general", "biquadratic-corollary", "cubic")


def euler_gamma() -> float:
    return EULER_GAMMA


def A_at_one() -> float:
    """A(1) = 2 e^gamma, the upper constant in dimension one."""
    return 2.0 * math.exp(EULER_GAMMA)


def _check_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not 0.0 <= kappa < KAPPA_MAX:
        raise DomainError(f"kappa={kappa} outside [0, 1/2)")
    return kappa


def _p_integrand(kappa: float, branch: float) -> Integrand:
    # z^{-k} e^{-k E1} = e^{k gamma} e^{-k Ein(z)}: bounded at 0
    def f(z):
        e1, _ = e1_array(z, branch)
        return np.exp(-kappa * np.log(z) - z - kappa * e1)

    def g(z):
        return np.exp(kappa * EULER_GAMMA - z - kappa * ein_array(z))

    return Integrand(
        func=f, monotone="decreasing", convex=True,
        head_factor=g, head_limit=math.exp(kappa * EULER_GAMMA),
        tail_bound=lambda Z: Z ** -kappa * math.exp(-Z),
        rel_err=_E1_REL,
    )


def _q_integrand(kappa: float, branch: float) -> Integrand:
    # near 0 the integrand is z^{-2k} e^{-k gamma} e^{-z + k Ein(z)}
    def f(z):
        e1, _ = e1_array(z, branch)
        return np.exp(-kappa * np.log(z) - z + kappa * e1)

    def g(z):
        return np.exp(-kappa * EULER_GAMMA - z + kappa * ein_array(z))

    def tail(Z):
        e1 = float(e1_array(np.array([Z]), branch)[0][0])
        return 1.01 * Z ** -kappa * math.exp(kappa * e1 - Z)

    return Integrand(
        func=f, monotone="decreasing", convex=True,
        head_factor=g, head_limit=math.exp(-kappa * EULER_GAMMA),
        tail_bound=tail, rel_err=_E1_REL,
    )


def p_integral(kappa: float, tol: float = 1e-10, branch: float = 5.0) -> CertifiedValue:
    kappa = _check_kappa(kappa)
    return integrate_certified(_p_integrand(kappa, branch), 0.0, math.inf,
                               singularity_hint=0.0, tol=tol)


def q_integral(kappa: float, tol: float = 1e-10, branch: float = 5.0) -> CertifiedValue:
    kappa = _check_kappa(kappa)
    return integrate_certified(_q_integrand(kappa, branch), 0.0, math.inf,
                               singularity_hint=2 * kappa, tol=tol)


@dataclass(frozen=True)
class SieveConstants:
    kappa: float
    p: CertifiedValue
    q: CertifiedValue
    A: CertifiedValue
    B: CertifiedValue
    r: CertifiedValue

    def to_dict(self) -> dict:
        out = {"kappa": self.kappa}
        for name in ("p", "q", "A", "B", "r"):
            out[name] = getattr(self, name).to_dict()
        return out


def beta_sieve_constants(kappa: float, tol: float = 1e-10, branch: float = 5.0) -> SieveConstants:
    kappa = _check_kappa(kappa)
    p = p_integral(kappa, tol, branch)
    q = q_integral(kappa, tol, branch)
    scale = CertifiedValue.exact(2.0) * CertifiedValue.exact(EULER_GAMMA * kappa).exp()
    g1 = gamma(1.0 - kappa)
    s = p + q
    A = scale / g1 * q / s
    B = scale / s
    r = B / A
    alt = g1 / q
    if not r.intersects(alt):
        raise ArithmeticError("r = B/A disagrees with Gamma(1-kappa)/q")
    # Gamma(1 - kappa) / q carries the smaller radius; both enclose the truth
    lo, hi = max(r.lo, alt.lo), min(r.hi, alt.hi)
    return SieveConstants(kappa, p, q, A, B, CertifiedValue.from_bounds(lo, hi))


def r_ratio(kappa: float, tol: float = 1e-10, branch: float = 5.0) -> CertifiedValue:
    """B/A computed as Gamma(1 - kappa) / q(kappa)."""
    kappa = _check_kappa(kappa)
    return gamma(1.0 - kappa) / q_integral(kappa, tol, branch)


# --- pieces of the threshold functions -----------------------------------

def log_weight_integral(kappa: float, tol: float = 1e-10) -> CertifiedValue:
    """Integral of (2 - s)^{-kappa} / s over [1, 2].

    Computed after u = 2 - s, i.e. the integral of u^{-kappa} / (2 - u)
    over (0, 1), which also equals the integral of (2-s)^{-1} s^{-kappa}
    over (0, 1).
    """
    kappa = float(kappa)
    if not 0 <= kappa < 1:
        raise DomainError("exponent must lie in [0, 1)")
    ig = Integrand(
        func=lambda u: u ** -kappa / (2.0 - u),
        convex=True,
        head_factor=lambda u: 1.0 / (2.0 - u),
        head_limit=0.5,
    )
    return integrate_certified(ig, 0.0, 1.0, singularity_hint=kappa, tol=tol)


def H_factor(t: float) -> CertifiedValue:
    """A(1) e^{gamma(t-1)} t^{-t} (t+1)^{t+1} / Gamma(2-t)."""
    if not 0 < t < 1:
        raise DomainError("t must lie in (0, 1)")
    expo = EULER_GAMMA * t - t * math.log(t) + (t + 1) * math.log1p(t)
    # A(1) e^{gamma(t-1)} = 2 e^{gamma t}
    num = CertifiedValue(math.log(2.0) + expo, 4e-16 * (abs(expo) + 1)).exp()
    return num / gamma(2.0 - t)


def companion_prefactor(kappa: float, kappa_i: float) -> float:
    """kappa_i e^{-gamma kappa_i}/Gamma(1+kappa_i) kappa^-kappa kappa_i^-kappa_i (kappa+kappa_i)^(kappa+kappa_i)."""
    if not (0 <= kappa < 0.5 and 0.5 < kappa_i <= 1):
        raise DomainError("need 0 <= kappa < 1/2 < kappa_i <= 1")
    s = kappa + kappa_i

    def xlogx(x):
        return x * math.log(x) if x > 0 else 0.0

    log_mix = -xlogx(kappa) - xlogx(kappa_i) + xlogx(s)
    return kappa_i * math.exp(-EULER_GAMMA * kappa_i + log_mix) / math.gamma(1 + kappa_i)


def W_weight(s, kappa: float, kappa_i: float):
    """The S4 weight W(s) for 0 < s < 2."""
    s = np.asarray(s, dtype=float)
    tot = kappa + kappa_i
    c = (kappa / tot) ** -kappa * (kappa_i / tot) ** -kappa_i
    return c * (2.0 - s) ** -tot * s ** (kappa_i - 1)


def companion_kernel_integral(kappa: float, kappa_i: float, upper: float = 1.0,
                              tol: float = 1e-10) -> CertifiedValue:
    """Integral of (2 - s)^{-(kappa + kappa_i)} s^{kappa_i - 1} over (0, upper)."""
    if not 0 < kappa_i:
        raise DomainError("kappa_i must be positive for integrability at 0")
    if not 0 < upper < 2:
        raise DomainError("upper limit must lie in (0, 2)")
    tot = kappa + kappa_i
    ig = Integrand(
        func=lambda s: (2.0 - s) ** -tot * s ** (kappa_i - 1),
        convex=True,
        head_factor=lambda s: (2.0 - s) ** -tot,
        head_limit=2.0 ** -tot,
    )
    return integrate_certified(ig, 0.0, upper, singularity_hint=1 - kappa_i, tol=tol)


def companion_constant_chi(kappa: float, kappa_i: float) -> float:
    return companion_prefactor(kappa, kappa_i)


# --- threshold equations -------------------------------------------------

_DEFAULT_COEFF = {
    "quadratic-general": Fraction(1),
    "biquadratic-corollary": Fraction(2, 3),
    "cubic": Fraction(1, 3),
}
_BRACKETS = {
    "quadratic-general": (0.05, 0.49),
    "biquadratic-corollary": (0.05, 0.49),
    "cubic": (0.21, 0.49),
}


@dataclass(frozen=True)
class ThresholdSpec:
    """Which threshold equation to solve.

    ``coefficient`` multiplies ``x * integral`` (quadratic variants) or
    ``t * H(t) * integral`` (cubic); ``None`` selects the stated default.
    """
    variant: str
    coefficient: Optional[Fraction] = None
    bracket: Optional[tuple] = field(default=None)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown threshold variant {self.variant!r}")
        if self.coefficient is None:
            object.__setattr__(self, "coefficient", _DEFAULT_COEFF[self.variant])
        if self.bracket is None:
            object.__setattr__(self, "bracket", _BRACKETS[self.variant])

    @property
    def domain(self):
        return (0.2, KAPPA_MAX) if self.variant == "cubic" else (0.0, KAPPA_MAX)


def threshold_lhs(spec: ThresholdSpec, x: float, tol: float = 1e-9,
                  branch: float = 5.0) -> CertifiedValue:
    lo, hi = spec.domain
    if not lo < x < hi and not (x == 0 and spec.variant != "cubic"):
        raise DomainError(f"{spec.variant} is defined for {lo} < x < {hi}")
    c = float(spec.coefficient)
    r = r_ratio(x, tol, branch)
    integral = log_weight_integral(x, tol)
    if spec.variant == "cubic":
        return r - CertifiedValue.exact(c * x) * H_factor(x) * integral
    return r - CertifiedValue.exact(c * x) * integral


def _is_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def solve_threshold(spec: ThresholdSpec, tol: float = 1e-5, quad_tol: float = 1e-6,
                    branch: float = 5.0, check_points: int = 10,
                    min_quad_tol: float = 1e-12) -> CertifiedValue:
    """Largest x with positive left-hand side, as a certified interval.

    Each bisection step starts at ``quad_tol`` and tightens the quadrature
    only while the sign at the midpoint is still ambiguous.
    """
    a, b = spec.bracket
    if check_points:
        xs = np.linspace(a, b, check_points)
        vals = [threshold_lhs(spec, float(x), 1e-5, branch).value for x in xs]
        if not _is_decreasing(vals):
            raise DomainError(f"{spec.variant}: left-hand side not decreasing on {spec.bracket}")

    def sign_at(x):
        qt = quad_tol
        while True:
            fx = threshold_lhs(spec, x, qt, branch)
            if fx.lo > 0:
                return 1
            if fx.hi < 0:
                return -1
            if qt <= min_quad_tol:
                return 0
            qt *= 1e-2

    if sign_at(a) != 1 or sign_at(b) != -1:
        raise DomainError(f"{spec.variant}: no root in bracket {spec.bracket}")
    while b - a > tol:
        m = 0.5 * (a + b)
        sg = sign_at(m)
        if sg > 0:
            a = m
        elif sg < 0:
            b = m
        else:
            break
    return CertifiedValue.from_bounds(a, b)


@lru_cache(maxsize=None)
def solve_threshold_cached(variant: str, tol: float = 1e-5) -> CertifiedValue:
    """solve_threshold for a default ThresholdSpec, memoized per process."""
    return solve_threshold(ThresholdSpec(variant), tol=tol)
