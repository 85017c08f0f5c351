"""Special functions and quadrature with rigorous error radii.

Everything here works in 64-bit floats.  Each result is a
:class:`CertifiedValue`: a midpoint plus a radius that absorbs truncation
error and a fixed rounding slack, so that downstream constants can be
bracketed rather than merely estimated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

EULER_GAMMA = 0.5772156649015329

_EPS = np.finfo(float).eps
# per-operation rounding slack, in units of the result magnitude
_SLACK = 10 * _EPS
# absolute slack covering underflow into subnormals
_TINY = 2.0 ** -1000


class DomainError(ValueError):
    """Argument outside the range where a routine is defined or certified."""


@dataclass(frozen=True)
class CertifiedValue:
    value: float
    error_radius: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "error_radius", float(self.error_radius))
        if not self.error_radius >= 0:
            raise ValueError("error_radius must be non-negative")

    @classmethod
    def exact(cls, x) -> "CertifiedValue":
        return cls(float(x), 0.0)

    @property
    def lo(self) -> float:
        return self.value - self.error_radius

    @property
    def hi(self) -> float:
        return self.value + self.error_radius

    @classmethod
    def from_bounds(cls, lo: float, hi: float) -> "CertifiedValue":
        if hi < lo:
            raise ValueError("empty interval")
        lo, hi = float(lo), float(hi)
        mid = 0.5 * (lo + hi)
        return cls(mid, 0.5 * (hi - lo) + _SLACK * abs(mid))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def intersects(self, other: "CertifiedValue") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def widen(self, extra: float) -> "CertifiedValue":
        return CertifiedValue(self.value, self.error_radius + extra)

    def _coerce(self, other) -> "CertifiedValue":
        if isinstance(other, CertifiedValue):
            return other
        return CertifiedValue.exact(other)

    def __add__(self, other):
        o = self._coerce(other)
        v = self.value + o.value
        err = self.error_radius + o.error_radius
        return CertifiedValue(v, err + _SLACK * (abs(v) + err) + _TINY)

    __radd__ = __add__

    def __neg__(self):
        return CertifiedValue(-self.value, self.error_radius)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        v = self.value * o.value
        err = (abs(self.value) * o.error_radius + abs(o.value) * self.error_radius
               + self.error_radius * o.error_radius)
        return CertifiedValue(v, err + _SLACK * (abs(v) + err) + _TINY)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def reciprocal(self) -> "CertifiedValue":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        m = min(abs(self.lo), abs(self.hi))
        v = 1.0 / self.value
        return CertifiedValue(v, self.error_radius / (m * abs(self.value)) + _SLACK * abs(v))

    def exp(self) -> "CertifiedValue":
        v = math.exp(self.value)
        # |e^{x+h} - e^x| <= e^x (e^{|h|} - 1)
        return CertifiedValue(v, v * math.expm1(self.error_radius) + _SLACK * v)

    def log(self) -> "CertifiedValue":
        if self.lo <= 0:
            raise DomainError("log of an interval reaching zero")
        v = math.log(self.value)
        return CertifiedValue(v, -math.log1p(-self.error_radius / self.value)
                              + _SLACK * max(abs(v), 1.0))

    def to_dict(self) -> dict:
        return {"value": self.value, "error_radius": self.error_radius}


# --- exponential integral -------------------------------------------------

def _e1_series(z: np.ndarray):
    """E1 by its power series; returns (values, absolute error bounds)."""
    z = np.asarray(z, dtype=float)
    zmax = float(np.max(z, initial=0.0))
    term = np.ones_like(z)
    total = np.zeros_like(z)
    mag = np.zeros_like(z)
    n = 0
    while True:
        n += 1
        term = term * (-z) / n
        t = term / n
        total += t
        mag += np.abs(t)
        # past n > z the terms alternate and shrink, so the last one bounds the rest
        if n > zmax + 1 and float(np.max(np.abs(t))) < 1e-20:
            break
    val = -EULER_GAMMA - np.log(z) - total
    err = np.abs(t) + 8 * _EPS * (mag + EULER_GAMMA + np.abs(np.log(z)) + np.abs(val))
    return val, err


def _e1_cfrac(z: np.ndarray, max_terms: int = 5000):
    """E1 by the Stieltjes continued fraction.

    With partial denominators alternating z, 1 and positive numerators
    1, 1, 1, 2, 2, 3, 3, ... the convergents alternate around the limit, so
    two consecutive convergents bracket e^z E1(z).
    """
    z = np.asarray(z, dtype=float)
    # forward recurrence A_k = b_k A_{k-1} + a_k A_{k-2}, same for B
    a_prev, a_cur = np.ones_like(z), np.zeros_like(z)   # A_{-1}, A_0
    b_prev, b_cur = np.zeros_like(z), np.ones_like(z)   # B_{-1}, B_0
    last = None
    k = 0
    while True:
        k += 1
        num = 1.0 if k <= 2 else float(k // 2)
        den = z if k % 2 == 1 else 1.0
        a_prev, a_cur = a_cur, den * a_cur + num * a_prev
        b_prev, b_cur = b_cur, den * b_cur + num * b_prev
        s = np.abs(b_cur)
        a_prev, a_cur, b_prev, b_cur = a_prev / s, a_cur / s, b_prev / s, b_cur / s
        conv = a_cur / b_cur
        if last is not None:
            width = np.abs(conv - last)
            if np.all(width <= 4 * _EPS * np.abs(conv)) or k >= max_terms:
                break
        last = conv
    scale = np.exp(-z)
    val = scale * 0.5 * (conv + last)
    err = scale * (0.5 * width + 16 * _EPS * np.abs(conv)) + 4 * _EPS * np.abs(val)
    if k >= max_terms and np.any(width > 1e-12 * np.abs(conv)):
        raise DomainError("continued fraction did not converge; raise the branch point")
    return val, err


def e1_array(z, branch: float = 5.0):
    """Vectorised E1(z) = -Ei(-z) for z > 0 with elementwise error bounds."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("E1 requires z > 0")
    val = np.empty_like(z)
    err = np.empty_like(z)
    lo = z <= branch
    if np.any(lo):
        val[lo], err[lo] = _e1_series(z[lo])
    if np.any(~lo):
        val[~lo], err[~lo] = _e1_cfrac(z[~lo])
    return val, err


def ein_array(z):
    """Entire part Ein(z) = E1(z) + gamma + ln z, by its series (small z only)."""
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.zeros_like(z)
    for n in range(1, 60):
        term = term * (-z) / n
        total -= term / n
    return total


def exp_integral_Ei_neg(z: float, branch: float = 5.0) -> CertifiedValue:
    """Ei(-z) for real z > 0.

    >>> round(exp_integral_Ei_neg(1.0).value, 8)
    -0.21938393
    """
    if not z > 0:
        raise DomainError("Ei(-z) is evaluated for z > 0 only")
    if z > 700:
        # 0 > Ei(-z) > -e^{-z}/z, below the smallest normal float
        return CertifiedValue(0.0, math.exp(-z) / z if z < 745 else 5e-324)
    v, e = e1_array(np.array([float(z)]), branch=branch)
    return CertifiedValue(-float(v[0]), float(e[0]))


# --- gamma function ------------------------------------------------------

# B_{2k} / (2k (2k-1)) for k = 1..10
_STIRLING = [1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360,
             1 / 156, -3617 / 122400, 43867 / 244188, -174611 / 125400]
_SHIFT = 12.0


def log_gamma(x: float) -> CertifiedValue:
    """ln Gamma(x) for x > 0, via upward shift and the Stirling series.

    The Stirling remainder for real x is bounded by the first omitted term.
    """
    if not x > 0:
        raise DomainError("log_gamma is defined here for x > 0 only")
    x = float(x)
    shift = 0.0
    shift_err = 0.0
    while x < _SHIFT:
        shift += math.log(x)
        shift_err += 2 * _EPS * max(abs(math.log(x)), 1.0)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    s = 0.0
    p = inv
    for c in _STIRLING[:-1]:
        s += c * p
        p *= inv2
    remainder = abs(_STIRLING[-1]) * p
    val = (x - 0.5) * math.log(x) - x + 0.5 * math.log(2 * math.pi) + s - shift
    mag = abs((x - 0.5) * math.log(x)) + x + 1.0 + abs(shift)
    return CertifiedValue(val, remainder + shift_err + 8 * _EPS * mag)


def gamma(x: float) -> CertifiedValue:
    return log_gamma(x).exp()


# --- certified quadrature ------------------------------------------------

@dataclass
class Integrand:
    """A positive integrand with the shape facts needed to bracket it.

    ``func`` must accept numpy arrays.  ``monotone`` is ``"decreasing"``,
    ``"increasing"`` or ``None``; ``convex`` asserts convexity on the open
    interval.  At least one of the two must hold.

    For an integrable singularity at the left endpoint ``a`` supply
    ``head_factor``: a vectorised g with f(z) = (z - a)^(-e) g(z) near ``a``,
    monotone on the head, together with ``head_limit`` = g(a+).  The
    exponent e is passed to :func:`integrate_certified` as the singularity
    hint.

    ``tail_bound(Z)`` must return an upper bound for the integral beyond Z
    when the upper limit is infinite.  ``rel_err`` bounds the relative error
    of a single ``func`` evaluation.
    """
    func: Callable[[np.ndarray], np.ndarray]
    monotone: Optional[str] = None
    convex: bool = False
    head_factor: Optional[Callable[[np.ndarray], np.ndarray]] = None
    head_limit: Optional[float] = None
    tail_bound: Optional[Callable[[float], float]] = None
    rel_err: float = 0.0

    def __post_init__(self):
        if self.monotone not in (None, "decreasing", "increasing"):
            raise ValueError(f"unknown monotonicity {self.monotone!r}")
        if self.monotone is None and not self.convex:
            raise ValueError("integrand needs monotonicity or convexity to be bracketed")


def _cell_bounds(ig: Integrand, f0, f1, fm, h):
    lo = np.full_like(h, -np.inf)
    hi = np.full_like(h, np.inf)
    if ig.monotone == "decreasing":
        lo = np.maximum(lo, h * f1)
        hi = np.minimum(hi, h * f0)
    elif ig.monotone == "increasing":
        lo = np.maximum(lo, h * f0)
        hi = np.minimum(hi, h * f1)
    if ig.convex:
        lo = np.maximum(lo, h * fm)
        hi = np.minimum(hi, 0.5 * h * (f0 + f1))
    return lo, hi


def riemann_bracket(func, a: float, b: float, n: int, monotone: str = "decreasing"):
    """Lower and upper step sums of a monotone function on n equal cells."""
    x = np.linspace(a, b, n + 1)
    f = np.asarray(func(x), dtype=float)
    h = (b - a) / n
    left = h * math.fsum(f[:-1])
    right = h * math.fsum(f[1:])
    lo, hi = (right, left) if monotone == "decreasing" else (left, right)
    slack = 4 * n * _EPS * max(abs(lo), abs(hi))
    return lo - slack, hi + slack


def _bracket_finite(ig: Integrand, a: float, b: float, budget: float,
                    max_nodes: int = 20_000_000):
    """Adaptive bracket of a regular integrand on [a, b]; returns (lo, hi)."""
    if b <= a:
        return 0.0, 0.0
    if a > 0 and b / a > 50:
        x = np.unique(np.concatenate([np.geomspace(a, b, 400), np.linspace(a, b, 65)]))
    else:
        x = np.linspace(a, b, 257)
    fx = np.asarray(ig.func(x), dtype=float)
    xm = 0.5 * (x[:-1] + x[1:])
    fm = np.asarray(ig.func(xm), dtype=float)
    while True:
        h = np.diff(x)
        lo, hi = _cell_bounds(ig, fx[:-1], fx[1:], fm, h)
        w = hi - lo
        total = float(np.sum(w))
        if total <= budget:
            return math.fsum(lo), math.fsum(hi)
        if x.size > max_nodes:
            raise DomainError(f"quadrature did not reach tolerance ({total:.3g} > {budget:.3g})")
        split = w > 0.25 * budget / w.size
        if not np.any(split):
            split = w >= np.max(w)
        # insert old midpoints as nodes, evaluate two new midpoints per split cell
        idx = np.nonzero(split)[0]
        new_x = xm[idx]
        new_f = fm[idx]
        q1 = 0.5 * (x[idx] + new_x)
        q2 = 0.5 * (new_x + x[idx + 1])
        fq = np.asarray(ig.func(np.concatenate([q1, q2])), dtype=float)
        f_q1, f_q2 = fq[:idx.size], fq[idx.size:]
        x = np.insert(x, idx + 1, new_x)
        fx = np.insert(fx, idx + 1, new_f)
        # rebuild midpoint array: unsplit cells keep theirs, split cells get two
        keep = np.ones(xm.size, dtype=bool)
        keep[idx] = False
        mids = np.empty(x.size - 1)
        fmid = np.empty(x.size - 1)
        # position of each old cell in the new cell list
        shift = np.cumsum(split) - split
        pos = np.arange(xm.size) + shift
        mids[pos[keep]] = xm[keep]
        fmid[pos[keep]] = fm[keep]
        mids[pos[idx]] = q1
        fmid[pos[idx]] = f_q1
        mids[pos[idx] + 1] = q2
        fmid[pos[idx] + 1] = f_q2
        xm, fm = mids, fmid


def integrate_certified(f: Integrand, a: float, b: float,
                        singularity_hint: Optional[float] = None,
                        tol: float = 1e-8) -> CertifiedValue:
    """Certified integral of ``f`` over (a, b); ``b`` may be ``math.inf``.

    The head near a singular left endpoint is bracketed analytically from
    the monotone factor g, the infinite tail by ``f.tail_bound``, and the
    remaining finite piece by adaptive monotone / convex cell brackets.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    budget = tol
    head_lo = head_hi = 0.0
    start = a
    if singularity_hint is not None:
        e = float(singularity_hint)
        if e >= 1:
            raise DomainError(f"head exponent {e} >= 1 is not integrable")
        if f.head_factor is None or f.head_limit is None:
            raise ValueError("a singular head needs head_factor and head_limit")
        span = (b - a) if math.isfinite(b) else 1.0
        delta = min(0.1, 0.5 * span)
        while True:
            g_end = float(f.head_factor(np.array([a + delta]))[0])
            g_min, g_max = sorted((g_end, float(f.head_limit)))
            mass = delta ** (1 - e) / (1 - e)
            head_lo, head_hi = g_min * mass, g_max * mass
            if head_hi - head_lo <= 0.25 * budget:
                break
            delta *= 0.1
            if delta < 1e-290:
                raise DomainError("could not resolve the singular head")
        start = a + delta
    tail_hi = 0.0
    stop = b
    if not math.isfinite(b):
        if f.tail_bound is None:
            raise ValueError("an infinite range needs a tail bound")
        stop = max(start, 1.0) + 7.0
        while f.tail_bound(stop) > 0.25 * budget:
            stop *= 1.5
        tail_hi = f.tail_bound(stop)
    mid_lo, mid_hi = _bracket_finite(f, start, stop, 0.25 * budget)
    lo = head_lo + mid_lo
    hi = head_hi + mid_hi + tail_hi
    eval_err = (f.rel_err + 64 * _EPS) * abs(hi)
    return CertifiedValue.from_bounds(lo - eval_err, hi + eval_err)
