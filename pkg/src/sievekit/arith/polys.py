"""Integer binary forms, univariate polynomials, and arithmetic over F_p.

Text input follows the grammar in docs/grammar.md: integer polynomials in
x (and y for forms) with ``^`` powers, implicit multiplication and
parentheses, e.g. ``"(x^2-2y^2)(-x^2+3y^2)"`` or ``"x^3-2"``.

Univariate polynomials over F_p are ascending coefficient lists (index j
holds the coefficient of x^j); batched versions hold one row per prime.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

X, Y = sympy.symbols("x y")
_ALLOWED = re.compile(r"^[0-9xy+\-*^()\s]+$")
_TRANSFORMS = standard_transformations + (implicit_multiplication_application, convert_xor)


class ParseError(ValueError):
    pass


def _parse_expr(text: str, variables: tuple) -> sympy.Poly:
    if not text or not _ALLOWED.match(text):
        raise ParseError(f"unsupported characters in {text!r}")
    try:
        expr = parse_expr(text, local_dict={"x": X, "y": Y}, transformations=_TRANSFORMS)
        poly = sympy.Poly(sympy.expand(expr), *variables)
    except (SyntaxError, TypeError, sympy.PolynomialError, sympy.SympifyError) as exc:
        raise ParseError(f"cannot parse {text!r}: {exc}") from None
    if poly.is_zero:
        raise ParseError("zero polynomial")
    if not all(c.is_integer for c in poly.coeffs()):
        raise ParseError(f"non-integer coefficients in {text!r}")
    return poly


def parse_polynomial(text: str) -> tuple:
    """Univariate integer polynomial in x, coefficients leading first."""
    poly = _parse_expr(text, (X,))
    return tuple(int(c) for c in poly.all_coeffs())


def polynomial_to_string(coeffs: Sequence[int], var: str = "x") -> str:
    d = len(coeffs) - 1
    terms = []
    for i, c in enumerate(coeffs):
        if c:
            terms.append((int(c), d - i))
    return _join_terms([(c, [(var, e)]) for c, e in terms])


def _join_terms(terms) -> str:
    out = []
    for c, pows in terms:
        mono = "".join(v if e == 1 else f"{v}^{e}" for v, e in pows if e)
        mag = abs(c)
        body = mono if (mag == 1 and mono) else f"{mag}{mono}"
        sign = "-" if c < 0 else "+"
        out.append((sign, body))
    if not out:
        return "0"
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in out[1:]:
        s += sign + body
    return s


# --- binary forms --------------------------------------------------------

@dataclass(frozen=True)
class BinaryForm:
    """sum_i coeffs[i] x^(d-i) y^i, with d = len(coeffs) - 1."""
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) < 1 or not any(coeffs):
            raise ValueError("form needs a nonzero coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_y(self) -> bool:
        return self.coeffs == (0, 1)

    @property
    def leading_x(self) -> int:
        """f(1, 0); the point [1:0] is a root mod p iff p divides this."""
        return self.coeffs[0]

    def dehomogenized(self) -> tuple:
        """f(x, 1) with leading zeros stripped, leading coefficient first."""
        c = list(self.coeffs)
        while len(c) > 1 and c[0] == 0:
            c.pop(0)
        return tuple(c)

    def __call__(self, a: int, b: int) -> int:
        d = self.degree
        return sum(c * a ** (d - i) * b ** i for i, c in enumerate(self.coeffs))

    def evaluate_array(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Values at integer arrays; int64 unless the caller passes object arrays."""
        v = np.full(np.shape(a), self.coeffs[0], dtype=a.dtype)
        bp = np.ones_like(b)
        for c in self.coeffs[1:]:
            bp = bp * b
            v = v * a + c * bp
        return v

    def value_bound(self, n: int) -> int:
        """Upper bound for |f(a, b)| with 0 <= a, b <= n."""
        return sum(abs(c) for c in self.coeffs) * n ** self.degree

    def sympy_expr(self):
        d = self.degree
        return sum(c * X ** (d - i) * Y ** i for i, c in enumerate(self.coeffs))

    def __str__(self):
        d = self.degree
        return _join_terms([(c, [("x", d - i), ("y", i)])
                            for i, c in enumerate(self.coeffs) if c])


def _form_from_poly(poly: sympy.Poly) -> BinaryForm:
    d = poly.total_degree()
    coeffs = [0] * (d + 1)
    for (ex, ey), c in poly.terms():
        coeffs[ey] = int(c)
    return BinaryForm(tuple(coeffs))


def binary_discriminant(expr) -> int:
    """Discriminant of a binary form, invariant under SL2(Z) substitution."""
    poly = sympy.Poly(expr, X, Y)
    d = poly.total_degree()
    if d <= 0:
        return 1
    if d == 1:
        return 1
    for c in range(0, d + 2):
        shifted = sympy.Poly(sympy.expand(expr.subs(Y, Y + c * X)), X, Y)
        uni = sympy.Poly(shifted.as_expr().subs(Y, 1), X)
        if uni.degree() == d:
            return int(sympy.discriminant(uni, X))
    raise ArithmeticError("no substitution keeps full degree")


@dataclass(frozen=True)
class FactoredBinaryForm:
    """unit * prod f_i^(m_i) with distinct primitive irreducible f_i."""
    unit: int
    factors: tuple  # of BinaryForm
    multiplicities: tuple

    @classmethod
    def parse(cls, text: str) -> "FactoredBinaryForm":
        poly = _parse_expr(text, (X, Y))
        if not poly.is_homogeneous:
            raise ParseError(f"{text!r} is not homogeneous")
        content, facs = sympy.factor_list(poly.as_expr(), X, Y)
        forms, mults = [], []
        for fac, m in facs:
            fp = sympy.Poly(fac, X, Y)
            forms.append(_form_from_poly(fp))
            mults.append(int(m))
        if not forms:
            raise ParseError("constant form")
        order = sorted(range(len(forms)), key=lambda i: (forms[i].degree, forms[i].coeffs))
        return cls(int(content), tuple(forms[i] for i in order), tuple(mults[i] for i in order))

    @classmethod
    def from_factors(cls, factors: Sequence[Sequence[int]], multiplicities=None,
                     unit: int = 1) -> "FactoredBinaryForm":
        forms = tuple(BinaryForm(tuple(f)) for f in factors)
        mults = tuple(multiplicities) if multiplicities is not None else (1,) * len(forms)
        for f in forms:
            content, facs = sympy.factor_list(f.sympy_expr(), X, Y)
            if abs(content) != 1 or len(facs) != 1 or facs[0][1] != 1:
                raise ValueError(f"factor {f} is not primitive irreducible")
        for i in range(len(forms)):
            for j in range(i + 1, len(forms)):
                if sympy.simplify(forms[i].sympy_expr() + forms[j].sympy_expr()) == 0 \
                        or forms[i] == forms[j]:
                    raise ValueError("factors must be pairwise non-proportional")
        return cls(int(unit), forms, mults)

    @property
    def degree(self) -> int:
        return sum(f.degree * m for f, m in zip(self.factors, self.multiplicities))

    @property
    def squarefree_degree(self) -> int:
        return sum(f.degree for f in self.factors)

    @property
    def has_y_factor(self) -> bool:
        return any(f.is_y for f in self.factors)

    def squarefree_expr(self):
        return sympy.Mul(*[f.sympy_expr() for f in self.factors])

    def discriminant(self) -> int:
        return binary_discriminant(self.squarefree_expr())

    def bad_primes(self) -> list:
        """Primes dividing the discriminant of the squarefree part."""
        return sorted(int(q) for q in sympy.primefactors(abs(self.discriminant())))

    def __call__(self, a: int, b: int) -> int:
        v = self.unit
        for f, m in zip(self.factors, self.multiplicities):
            v *= f(a, b) ** m
        return v

    def __str__(self):
        parts = []
        for f, m in zip(self.factors, self.multiplicities):
            s = str(f)
            if len(self.factors) > 1 or self.unit != 1 or m > 1:
                s = f"({s})"
            parts.append(s + (f"^{m}" if m > 1 else ""))
        prefix = "" if self.unit == 1 else ("-" if self.unit == -1 else f"{self.unit}")
        return prefix + "".join(parts)


# --- univariate arithmetic over F_p ---------------------------------------

def to_fp(coeffs_desc: Sequence[int], p: int) -> list:
    """Reduce a leading-first integer polynomial mod p, ascending and trimmed."""
    out = [int(c) % p for c in reversed(coeffs_desc)]
    return _trim(out)


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _monic(a: list, p: int) -> list:
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def poly_mod(a: list, g: list, p: int) -> list:
    """a mod g over F_p, for g nonzero."""
    a = list(a)
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(a) - 1 >= dg and a:
        c = a[-1] * inv % p
        shift = len(a) - 1 - dg
        for i, gc in enumerate(g):
            a[shift + i] = (a[shift + i] - c * gc) % p
        _trim(a)
    return a


def poly_mulmod(a: list, b: list, g: list, p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return poly_mod([c % p for c in out], g, p)


def powmod_x(e: int, g: list, p: int) -> list:
    """x^e mod g over F_p."""
    result = poly_mod([1], g, p)
    base = poly_mod([0, 1], g, p)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, g, p)
        e >>= 1
        if e:
            base = poly_mulmod(base, base, g, p)
    return result


def poly_sub(a: list, b: list, p: int) -> list:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def poly_gcd(a: list, b: list, p: int) -> list:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, poly_mod(a, b, p)
    return _monic(a, p) if a else a


def poly_divexact(a: list, b: list, p: int) -> list:
    a = list(a)
    db = len(b) - 1
    inv = pow(b[-1], -1, p)
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] * inv % p
        q[k] = c
        for i, bc in enumerate(b):
            a[k + i] = (a[k + i] - c * bc) % p
    if _trim(a):
        raise ArithmeticError("division not exact")
    return q


def count_roots_fp(g: list, p: int) -> int:
    """Number of distinct roots in F_p of a nonzero polynomial."""
    if len(g) <= 1:
        return 0
    h = powmod_x(p, g, p)
    return len(poly_gcd(g, poly_sub(h, [0, 1], p), p)) - 1


def ddf_degrees(g: list, p: int) -> list:
    """Degrees of the irreducible factors of a squarefree g over F_p."""
    g = _monic(list(g), p)
    parts = []
    h = poly_mod([0, 1], g, p)
    d = 0
    while len(g) - 1 >= 2 * (d + 1):
        d += 1
        h = _powmod(h, p, g, p)
        fac = poly_gcd(g, poly_sub(h, [0, 1], p), p)
        k = len(fac) - 1
        if k:
            parts += [d] * (k // d)
            g = poly_divexact(g, fac, p)
            h = poly_mod(h, g, p)
    if len(g) > 1:
        parts.append(len(g) - 1)
    return sorted(parts, reverse=True)


def _powmod(a: list, e: int, g: list, p: int) -> list:
    result = poly_mod([1], g, p)
    base = poly_mod(a, g, p)
    while e:
        if e & 1:
            result = poly_mulmod(result, base, g, p)
        e >>= 1
        if e:
            base = poly_mulmod(base, base, g, p)
    return result


# --- batched arithmetic: one row per prime, all rows share a degree -------

def batch_modinv(a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """a^(p-2) mod p elementwise; p < 2^31, a coprime to p."""
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while np.any(e):
        odd = (e & 1).astype(bool)
        result = np.where(odd, result * base % p, result)
        base = base * base % p
        e = e >> 1
    return result


def batch_monic(g_desc: Sequence[int], p: np.ndarray) -> np.ndarray:
    """Rows of g mod p made monic, ascending order, shape (P, d+1).

    The leading coefficient must be a unit modulo every prime in p.
    """
    d = len(g_desc) - 1
    rows = np.empty((len(p), d + 1), dtype=np.int64)
    for j, c in enumerate(reversed(g_desc)):
        c = int(c)
        if abs(c) < 2 ** 62:
            rows[:, j] = np.int64(c) % p
        else:
            rows[:, j] = [c % int(q) for q in p]
    lead_inv = batch_modinv(rows[:, d], p)
    return rows * lead_inv[:, None] % p[:, None]


def batch_mulmod(a: np.ndarray, b: np.ndarray, g: np.ndarray, p: np.ndarray) -> np.ndarray:
    """(a*b) mod g mod p; a, b of shape (P, d), g monic of shape (P, d+1)."""
    P, d = a.shape
    pc = p[:, None]
    prod = np.zeros((P, 2 * d - 1), dtype=np.int64)
    for i in range(d):
        prod[:, i:i + d] = (prod[:, i:i + d] + a[:, i:i + 1] * b % pc) % pc
    for k in range(2 * d - 2, d - 1, -1):
        c = prod[:, k:k + 1]
        prod[:, k - d:k] = (prod[:, k - d:k] - c * g[:, :d] % pc) % pc
        prod[:, k] = 0
    return prod[:, :d]


def batch_powmod_x(g: np.ndarray, p: np.ndarray, e: np.ndarray) -> np.ndarray:
    """x^e mod g mod p per row, for monic g of degree d >= 1."""
    P, d1 = g.shape
    d = d1 - 1
    result = np.zeros((P, d), dtype=np.int64)
    result[:, 0] = 1
    base = np.zeros((P, d), dtype=np.int64)
    if d == 1:
        base[:, 0] = (-g[:, 0]) % p
    else:
        base[:, 1] = 1
    e = e.copy()
    while np.any(e):
        odd = (e & 1).astype(bool)
        if odd.any():
            result = np.where(odd[:, None], batch_mulmod(result, base, g, p), result)
        e = e >> 1
        if np.any(e):
            base = batch_mulmod(base, base, g, p)
    return result


def batch_rank(m: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Rank over F_p of each matrix in a stack of shape (P, n, n)."""
    m = m.copy() % p[:, None, None]
    P, n, _ = m.shape
    rank = np.zeros(P, dtype=np.int64)
    used = np.zeros((P, n), dtype=bool)
    rows = np.arange(P)
    for col in range(n):
        cand = (m[:, :, col] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        idx = rows[has]
        piv = np.argmax(cand[has], axis=1)
        pidx = p[idx]
        prow = m[idx, piv, :]
        prow = prow * batch_modinv(prow[:, col], pidx)[:, None] % pidx[:, None]
        fac = m[idx, :, col].copy()
        fac[np.arange(len(idx)), piv] = 0
        sub = m[idx]
        sub = (sub - fac[:, :, None] * prow[:, None, :] % pidx[:, None, None]) % pidx[:, None, None]
        sub[np.arange(len(idx)), piv, :] = prow
        m[idx] = sub
        used[idx, piv] = True
        rank[idx] += 1
    return rank
