"""Exact bivariate polynomials graded by a weighted (quasi-homogeneous) degree.

A monomial ``x^a y^b`` has weighted degree ``a*p1 + b*p2`` for the weight
vector ``(p1, p2)``; the radial field ``R = p1 x d/dx + p2 y d/dy`` acts on it
by multiplication with that degree. Coefficients are ``gmpy2.mpq`` rationals.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

from gmpy2 import mpq

from .errors import DivisionError, ParseError

Monomial = Tuple[int, int]

INF = math.inf


def to_q(value) -> mpq:
    """Coerce an int, Fraction, mpq or rational string to ``mpq``."""
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value.strip())
    return mpq(value)


@dataclass(frozen=True)
class Weights:
    """Weight vector ``(p1, p2)`` for x and y.

    One weight may be zero (a radial field such as ``x d/dx``); grading weights
    used for truncation must be strictly positive, see :attr:`positive`.
    """

    p1: int
    p2: int

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if not isinstance(p, int) or isinstance(p, bool) or p < 0:
                raise ValueError(f"weights must be nonnegative integers, got {self.p1, self.p2}")
        if self.p1 == 0 and self.p2 == 0:
            raise ValueError("weights cannot both be zero")
        if math.gcd(self.p1, self.p2) != 1:
            raise ValueError(f"weights must be coprime, got {self.p1, self.p2}")

    @property
    def positive(self) -> bool:
        return self.p1 > 0 and self.p2 > 0

    def __iter__(self):
        return iter((self.p1, self.p2))


def pdeg(m: Monomial, w: Weights) -> int:
    return m[0] * w.p1 + m[1] * w.p2


def canonical_key(m: Monomial, w: Weights):
    return (pdeg(m, w), -m[0])


@lru_cache(maxsize=4096)
def monomials_of_degree(d: int, w: Weights) -> Tuple[Monomial, ...]:
    """All exponent pairs of weighted degree ``d``, in canonical order."""
    if not w.positive:
        raise ValueError("graded slices need strictly positive weights")
    if d < 0:
        return ()
    out = []
    for ex in range(d // w.p1, -1, -1):
        rest = d - ex * w.p1
        if rest % w.p2 == 0:
            out.append((ex, rest // w.p2))
    return tuple(out)


class Poly:
    """Immutable sparse polynomial in x, y with exact rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean: Dict[Monomial, mpq] = {}
        if terms:
            for m, c in terms.items():
                c = to_q(c)
                if c:
                    clean[(int(m[0]), int(m[1]))] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, mpq]) -> "Poly":
        # trusted constructor: no zero coefficients, mpq values
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, ex: int, ey: int, c=1) -> "Poly":
        return cls({(ex, ey): c})

    @classmethod
    def parse(cls, text: str, source: str | None = None) -> "Poly":
        return parse_poly(text, source)

    # -- container protocol -------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return self.terms == Poly.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def items(self):
        return self.terms.items()

    def coeff(self, m: Monomial) -> mpq:
        return self.terms.get(m, mpq(0))

    @property
    def constant_term(self) -> mpq:
        return self.coeff((0, 0))

    # -- arithmetic ---------------------------------------------------------
    def __neg__(self):
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s += c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly._raw(out)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Poly":
        c = to_q(c)
        if not c:
            return Poly()
        return Poly._raw({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        return self.mul_trunc(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(mpq(1) / to_q(other))

    def mul_trunc(self, other: "Poly", w: Weights | None = None, maxdeg=None) -> "Poly":
        """Product, dropping monomials of ``w``-degree above ``maxdeg``."""
        out: Dict[Monomial, mpq] = {}
        if not self.terms or not other.terms:
            return Poly()
        if maxdeg is None:
            for (a1, b1), c1 in self.terms.items():
                for (a2, b2), c2 in other.terms.items():
                    m = (a1 + a2, b1 + b2)
                    out[m] = out.get(m, 0) + c1 * c2
        else:
            p1, p2 = w.p1, w.p2
            rhs = sorted(((a * p1 + b * p2, (a, b), c) for (a, b), c in other.terms.items()))
            for (a1, b1), c1 in self.terms.items():
                room = maxdeg - (a1 * p1 + b1 * p2)
                if room < 0:
                    continue
                for d2, (a2, b2), c2 in rhs:
                    if d2 > room:
                        break
                    m = (a1 + a2, b1 + b2)
                    out[m] = out.get(m, 0) + c1 * c2
        return Poly._raw({m: c for m, c in out.items() if c})

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def pow_trunc(self, n: int, w: Weights, maxdeg) -> "Poly":
        result = Poly.const(1)
        for _ in range(n):
            result = result.mul_trunc(self, w, maxdeg)
        return result

    def diff_x(self) -> "Poly":
        return Poly._raw({(a - 1, b): c * a for (a, b), c in self.terms.items() if a})

    def diff_y(self) -> "Poly":
        return Poly._raw({(a, b - 1): c * b for (a, b), c in self.terms.items() if b})

    # -- graded access ------------------------------------------------------
    def truncate(self, w: Weights, maxdeg) -> "Poly":
        return Poly._raw({m: c for m, c in self.terms.items() if pdeg(m, w) <= maxdeg})

    def part(self, w: Weights, d: int) -> "Poly":
        """Quasi-homogeneous component of degree ``d``."""
        return Poly._raw({m: c for m, c in self.terms.items() if pdeg(m, w) == d})

    def degrees(self, w: Weights) -> List[int]:
        return sorted({pdeg(m, w) for m in self.terms})

    def sorted_terms(self, w: Weights) -> List[Tuple[Monomial, mpq]]:
        return sorted(self.terms.items(), key=lambda t: canonical_key(t[0], w))

    def substitute(self, fx: "Poly", fy: "Poly", w: Weights | None = None, maxdeg=None) -> "Poly":
        """Composition ``self(fx, fy)``, optionally truncated."""
        out = Poly()
        xp = {0: Poly.const(1)}
        yp = {0: Poly.const(1)}

        def power(cache, base, k):
            if k not in cache:
                cache[k] = power(cache, base, k - 1).mul_trunc(base, w, maxdeg)
            return cache[k]

        for (a, b), c in self.terms.items():
            out = out + power(xp, fx, a).mul_trunc(power(yp, fy, b), w, maxdeg).scale(c)
        return out

    # -- text ---------------------------------------------------------------
    def to_str(self, w: Weights | None = None) -> str:
        return format_poly(self, w)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly('{format_poly(self)}')"


@dataclass(frozen=True)
class GradedSlice:
    degree: int
    monomials: Tuple[Monomial, ...]
    coeffs: Tuple[mpq, ...]

    def to_poly(self) -> Poly:
        return Poly(dict(zip(self.monomials, self.coeffs)))


def graded_slice(f: Poly, d: int, w: Weights) -> GradedSlice:
    monos = monomials_of_degree(d, w)
    return GradedSlice(d, monos, tuple(f.coeff(m) for m in monos))


def homogeneous_degree(f: Poly, w: Weights):
    """The common weighted degree of all terms, or None if ``f`` is not quasi-homogeneous."""
    degs = {pdeg(m, w) for m in f.terms}
    if len(degs) == 1:
        return degs.pop()
    return None


def qh_components(f: Poly, w: Weights) -> Dict[int, Poly]:
    comps: Dict[int, Dict[Monomial, mpq]] = {}
    for m, c in f.terms.items():
        comps.setdefault(pdeg(m, w), {})[m] = c
    return {d: Poly._raw(comps[d]) for d in sorted(comps)}


def porder(f: Poly, w: Weights):
    """Weighted order: smallest degree of a nonzero term; ``math.inf`` for zero."""
    return min((pdeg(m, w) for m in f.terms), default=INF)


def radial_apply(f: Poly, w: Weights) -> Poly:
    """Apply ``R = p1 x d/dx + p2 y d/dy``: each term is scaled by its degree."""
    return Poly._raw({m: c * pdeg(m, w) for m, c in f.terms.items() if pdeg(m, w)})


def mul_part(f: Poly, g: Poly, w: Weights, d: int) -> Poly:
    """Degree-``d`` component of ``f*g`` without forming the whole product."""
    by_deg: Dict[int, list] = {}
    for m, c in g.terms.items():
        by_deg.setdefault(pdeg(m, w), []).append((m, c))
    out: Dict[Monomial, mpq] = {}
    for (a1, b1), c1 in f.terms.items():
        for (a2, b2), c2 in by_deg.get(d - a1 * w.p1 - b1 * w.p2, ()):
            m = (a1 + a2, b1 + b2)
            out[m] = out.get(m, 0) + c1 * c2
    return Poly._raw({m: c for m, c in out.items() if c})


def graded_divide(f: Poly, g: Poly, w: Weights) -> Poly:
    """Exact quotient ``f / g`` for quasi-homogeneous ``g``.

    Division runs degree by degree; a nonzero remainder raises
    :class:`DivisionError` naming the first offending degree of ``f``.
    """
    dg = homogeneous_degree(g, w)
    if dg is None:
        raise ValueError("divisor must be quasi-homogeneous")
    lead_m, lead_c = max(g.terms.items(), key=lambda t: t[0])
    quotient: Dict[Monomial, mpq] = {}
    for d, comp in qh_components(f, w).items():
        r = dict(comp.terms)
        while r:
            m = max(r)
            if m[0] < lead_m[0] or m[1] < lead_m[1]:
                raise DivisionError("polynomial division left a nonzero remainder", degree=d)
            t = (m[0] - lead_m[0], m[1] - lead_m[1])
            c = r[m] / lead_c
            quotient[t] = quotient.get(t, 0) + c
            for gm, gc in g.terms.items():
                k = (gm[0] + t[0], gm[1] + t[1])
                v = r.get(k, 0) - c * gc
                if v:
                    r[k] = v
                else:
                    r.pop(k, None)
    return Poly(quotient)


# -- text syntax ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>[xy])|(?P<op>[-+*/^]))")


def _format_monomial(m: Monomial) -> str:
    parts = []
    for name, e in zip("xy", m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(f: Poly, w: Weights | None = None) -> str:
    """Canonical text: ascending weighted degree, then descending x exponent."""
    if w is None:
        w = Weights(1, 1)
    if not f.terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(f.sorted_terms(w)):
        mono = _format_monomial(m)
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if i == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def parse_poly(text: str, source: str | None = None) -> Poly:
    """Parse ``c*x^a*y^b`` terms joined by ``+``/``-``.

    Errors carry the 1-based column inside ``text``.
    """
    tokens = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        mt = _TOKEN.match(stripped, pos)
        if mt is None:
            col = pos + 1 + (len(stripped[pos:]) - len(stripped[pos:].lstrip()))
            raise ParseError(f"unexpected character {stripped[col - 1]!r}", column=col, source=source)
        kind = mt.lastgroup
        tokens.append((kind, mt.group(kind), mt.start(kind) + 1))
        pos = mt.end()
    tokens.append(("end", "", len(stripped) + 1))

    i = 0

    def peek():
        return tokens[i]

    def take(kind=None, value=None):
        nonlocal i
        tok = tokens[i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want}, got {got!r}", column=tok[2], source=source)
        i += 1
        return tok

    def factor():
        tok = peek()
        if tok[0] == "num":
            take()
            num = int(tok[1])
            if peek()[1] == "/":
                take()
                den = take("num")
                if int(den[1]) == 0:
                    raise ParseError("zero denominator", column=den[2], source=source)
                return mpq(num, int(den[1])), (0, 0)
            return mpq(num), (0, 0)
        if tok[0] == "var":
            take()
            e = 1
            if peek()[1] == "^":
                take()
                e = int(take("num")[1])
            return mpq(1), ((e, 0) if tok[1] == "x" else (0, e))
        got = tok[1] or "end of input"
        raise ParseError(f"expected a number or variable, got {got!r}", column=tok[2], source=source)

    def term():
        c, (a, b) = factor()
        while peek()[1] == "*":
            take()
            c2, (a2, b2) = factor()
            c, a, b = c * c2, a + a2, b + b2
        return (a, b), c

    out: Dict[Monomial, mpq] = {}
    sign = 1
    if peek()[1] in "+-" and peek()[0] == "op":
        sign = -1 if take()[1] == "-" else 1
    while True:
        m, c = term()
        out[m] = out.get(m, 0) + sign * c
        tok = peek()
        if tok[0] == "end":
            break
        if tok[1] not in ("+", "-"):
            raise ParseError(f"expected '+' or '-', got {tok[1]!r}", column=tok[2], source=source)
        take()
        sign = -1 if tok[1] == "-" else 1
    return Poly(out)


def iter_monomials_upto(maxdeg: int, w: Weights) -> Iterator[Monomial]:
    for d in range(maxdeg + 1):
        yield from monomials_of_degree(d, w)
