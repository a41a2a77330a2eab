"""Degree-by-degree solver for ``X0(b) = beta`` modulo a complement of the image.

``X0`` maps the degree-``n - delta0`` slice into the degree-``n`` slice. For
each degree one dense system is set up whose columns are the images of the
source monomials followed by the complement elements; its reduced echelon
form is computed once per context and reused for every right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple

from gmpy2 import mpq

from ._linalg import Echelon, Solver
from .errors import NotInIdealError, PreconditionError
from .grading import Monomial, Poly, homogeneous_degree, monomials_of_degree, pdeg, qh_components, to_q
from .logfields import QHContext
from .milnor import CokerBasis, coker_basis, jacobian_slice

STRUCTURED = "structured"
GENERIC = "generic"


@dataclass(frozen=True)
class CokerElement:
    """A remainder in the cokernel of ``X0``.

    Structured elements map ``(i, j)`` to the coefficient of ``a_i * h^j``;
    generic ones map a complement monomial ``(ex, ey)`` to its coefficient.
    """

    coeffs: Dict[Tuple[int, int], mpq] = field(default_factory=dict)
    structured: bool = True

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {k: to_q(v) for k, v in sorted(self.coeffs.items()) if v})

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other: "CokerElement") -> "CokerElement":
        if self.structured != other.structured:
            raise ValueError("cannot add structured and generic remainders")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return CokerElement(out, self.structured)

    def materialize(self, ctx: QHContext) -> Poly:
        if not self.structured:
            return Poly(self.coeffs)
        basis = coker_basis(ctx)
        out = Poly()
        for (i, j), c in self.coeffs.items():
            out = out + (basis.poly(i) * h_power(ctx, j)).scale(c)
        return out

    def series(self, i: int) -> Dict[int, mpq]:
        """Coefficients of ``d_i(h)`` as ``{power: coefficient}``."""
        return {j: c for (k, j), c in self.coeffs.items() if k == i}


class X0Solution(NamedTuple):
    b: Poly
    rem: CokerElement


def h_power(ctx: QHContext, j: int) -> Poly:
    key = ("hpow", j)
    if key not in ctx._cache:
        ctx._cache[key] = Poly.const(1) if j == 0 else h_power(ctx, j - 1) * ctx.h
    return ctx._cache[key]


def structured_terms(ctx: QHContext, n: int, basis: CokerBasis) -> List[Tuple[int, int]]:
    """Pairs ``(i, j)`` with ``a_i * h^j`` of grading degree ``n``."""
    g, hd = ctx.grading, ctx.h_degree
    out = []
    for i, m in enumerate(basis.monomials):
        rest = n - pdeg(m, g)
        if rest >= 0 and rest % hd == 0:
            out.append((i, rest // hd))
    return out


def _vector(f: Poly, index: Dict[Monomial, int], size: int) -> list:
    v = [mpq(0)] * size
    for m, c in f.terms.items():
        v[index[m]] = c
    return v


def resolve_mode(ctx: QHContext, mode: Optional[str]) -> str:
    if mode is None:
        return STRUCTURED if coker_basis(ctx) is not None else GENERIC
    if mode not in (STRUCTURED, GENERIC):
        raise ValueError(f"unknown basis mode {mode!r}")
    if mode == STRUCTURED and coker_basis(ctx) is None:
        raise PreconditionError(
            "no structured cokernel basis: X0 is neither an isolated Hamiltonian field nor diagonal"
        )
    return mode


class _DegreeSystem(NamedTuple):
    solver: Solver
    source: Tuple[Monomial, ...]
    target_index: Dict[Monomial, int]
    rem_keys: list


def _system(ctx: QHContext, n: int, mode: str) -> _DegreeSystem:
    key = ("x0sys", n, mode)
    if key in ctx._cache:
        return ctx._cache[key]
    g = ctx.grading
    target = monomials_of_degree(n, g)
    index = {m: k for k, m in enumerate(target)}
    source = monomials_of_degree(n - ctx.delta0, g)
    cols = [_vector(ctx.x0_apply(Poly.monomial(*m)), index, len(target)) for m in source]
    if mode == STRUCTURED:
        basis = coker_basis(ctx)
        rem_keys = structured_terms(ctx, n, basis)
        for i, j in rem_keys:
            cols.append(_vector(basis.poly(i) * h_power(ctx, j), index, len(target)))
    else:
        rem_keys = generic_complement(ctx, n)
        for m in rem_keys:
            unit = [mpq(0)] * len(target)
            unit[index[m]] = mpq(1)
            cols.append(unit)
    system = _DegreeSystem(Solver(cols, len(target)), source, index, rem_keys)
    ctx._cache[key] = system
    return system


def generic_complement(ctx: QHContext, n: int) -> List[Monomial]:
    """Monomials of degree ``n`` completing the image of ``X0``, greedily in canonical order."""
    g = ctx.grading
    target = monomials_of_degree(n, g)
    index = {m: k for k, m in enumerate(target)}
    ech = Echelon(len(target))
    for m in monomials_of_degree(n - ctx.delta0, g):
        ech.insert(_vector(ctx.x0_apply(Poly.monomial(*m)), index, len(target)))
    chosen = []
    for m in target:
        if ech.insert(_vector(Poly.monomial(*m), index, len(target))):
            chosen.append(m)
    return chosen


def solve_x0(beta: Poly, ctx: QHContext, mode: Optional[str] = None, K: Optional[int] = None) -> X0Solution:
    """Split ``beta = X0(b) + rem`` up to degree ``K``.

    The particular solution has no kernel component, so ``b`` is determined
    by ``beta`` alone. ``mode`` defaults to structured whenever a structured
    cokernel basis is available.
    """
    mode = resolve_mode(ctx, mode)
    K = ctx.K if K is None else K
    g = ctx.grading
    b: Dict[Monomial, mpq] = {}
    rem: Dict[tuple, mpq] = {}
    for n, comp in qh_components(beta, g).items():
        if n > K:
            break
        sysn = _system(ctx, n, mode)
        x = sysn.solver.solve(_vector(comp, sysn.target_index, len(sysn.target_index)))
        if x is None:
            raise PreconditionError(f"cokernel basis does not span degree {n}")
        ns = len(sysn.source)
        for m, c in zip(sysn.source, x[:ns]):
            if c:
                b[m] = c
        for k, c in zip(sysn.rem_keys, x[ns:]):
            if c:
                rem[k] = c
    return X0Solution(Poly._raw(b), CokerElement(rem, mode == STRUCTURED))


def x0_rank(ctx: QHContext, m: int) -> int:
    """Rank of ``X0`` from the degree-``m`` slice to the degree-``m + delta0`` slice."""
    g = ctx.grading
    target = monomials_of_degree(m + ctx.delta0, g)
    index = {t: k for k, t in enumerate(target)}
    cols = [_vector(ctx.x0_apply(Poly.monomial(*s)), index, len(target)) for s in monomials_of_degree(m, g)]
    return Solver(cols, len(target)).rank if cols and target else 0


def kernel_slice(m: int, ctx: QHContext) -> List[Poly]:
    """Basis of the kernel of ``X0`` on the degree-``m`` slice."""
    g = ctx.grading
    source = monomials_of_degree(m, g)
    target = monomials_of_degree(m + ctx.delta0, g)
    if not source:
        return []
    index = {t: k for k, t in enumerate(target)}
    cols = [_vector(ctx.x0_apply(Poly.monomial(*s)), index, len(target)) for s in source]
    if not target:
        return [Poly.monomial(*s) for s in source]
    out = []
    for vec in Solver(cols, len(target)).nullspace():
        out.append(Poly(dict(zip(source, vec))))
    return out


# -- division lemma ----------------------------------------------------------------


def _require_hamiltonian(ctx: QHContext):
    if not ctx.isolated_hamiltonian:
        raise PreconditionError("the division lemma needs the isolated Hamiltonian pipeline (h = h0)")


def division_lemma(f: Poly, ctx: QHContext, K: Optional[int] = None) -> Tuple[Poly, Poly]:
    """Write ``f = a*h + X0(b)`` for ``f`` in the Jacobian ideal.

    One linear system per degree, with the ``b`` unknowns ordered first so that
    ``a`` only absorbs what the image of ``X0`` cannot.
    """
    _require_hamiltonian(ctx)
    K = ctx.K if K is None else K
    w = ctx.weights
    a: Dict[Monomial, mpq] = {}
    b: Dict[Monomial, mpq] = {}
    for n, comp in qh_components(f, w).items():
        if n > K:
            break
        target = monomials_of_degree(n, w)
        index = {m: k for k, m in enumerate(target)}
        rhs = _vector(comp, index, len(target))
        if not jacobian_slice(ctx, n).contains(rhs):
            raise NotInIdealError(n)
        bsrc = monomials_of_degree(n - ctx.delta0, w)
        asrc = monomials_of_degree(n - ctx.delta, w)
        cols = [_vector(ctx.x0_apply(Poly.monomial(*m)), index, len(target)) for m in bsrc]
        cols += [_vector(ctx.h * Poly.monomial(*m), index, len(target)) for m in asrc]
        x = Solver(cols, len(target)).solve(rhs)
        if x is None:
            raise NotInIdealError(n)
        for m, c in zip(bsrc, x):
            if c:
                b[m] = c
        for m, c in zip(asrc, x[len(bsrc):]):
            if c:
                a[m] = c
    return Poly._raw(a), Poly._raw(b)


def division_lemma_constructive(f: Poly, ctx: QHContext) -> Tuple[Poly, Poly]:
    """Division through the divergence, used as an independent cross-check.

    With ``f = X(h)`` for ``X = f1 d/dx + f2 d/dy``, split ``X = alpha*R + Y``
    where ``alpha = (R + p1 + p2)^-1 div X`` makes ``Y`` divergence free. Then
    ``Y = g_y d/dx - g_x d/dy`` and ``f = delta*alpha*h + X0(-delta*g)``.
    """
    _require_hamiltonian(ctx)
    w = ctx.weights
    hx, hy = ctx.h.diff_x(), ctx.h.diff_y()
    dx, dy = homogeneous_degree(hx, w), homogeneous_degree(hy, w)
    f1: Dict[Monomial, mpq] = {}
    f2: Dict[Monomial, mpq] = {}
    for n, comp in qh_components(f, w).items():
        target = monomials_of_degree(n, w)
        index = {m: k for k, m in enumerate(target)}
        s1 = monomials_of_degree(n - dx, w) if dx is not None else ()
        s2 = monomials_of_degree(n - dy, w) if dy is not None else ()
        cols = [_vector(hx * Poly.monomial(*m), index, len(target)) for m in s1]
        cols += [_vector(hy * Poly.monomial(*m), index, len(target)) for m in s2]
        x = Solver(cols, len(target)).solve(_vector(comp, index, len(target))) if cols else None
        if x is None:
            raise NotInIdealError(n)
        f1.update({m: c for m, c in zip(s1, x) if c})
        f2.update({m: c for m, c in zip(s2, x[len(s1):]) if c})
    P, Q = Poly._raw(f1), Poly._raw(f2)
    p = w.p1 + w.p2
    div = P.diff_x() + Q.diff_y()
    alpha = Poly._raw({m: c / (pdeg(m, w) + p) for m, c in div.terms.items()})
    Y1 = P - (alpha * Poly.monomial(1, 0)).scale(w.p1)
    Y2 = Q - (alpha * Poly.monomial(0, 1)).scale(w.p2)
    # Euler relation for the stream function: R(g) = p2*y*Y1 - p1*x*Y2
    euler = (Poly.monomial(0, 1) * Y1).scale(w.p2) - (Poly.monomial(1, 0) * Y2).scale(w.p1)
    g = Poly._raw({m: c / pdeg(m, w) for m, c in euler.terms.items()})
    return alpha.scale(ctx.delta), g.scale(-ctx.delta)


# -- connection --------------------------------------------------------------------


def connection_apply(elem: CokerElement, ctx: QHContext) -> CokerElement:
    """``a_i h^j -> (j + r_i) a_i h^(j-1)`` with ``r_i = pdeg(a_i) / delta``."""
    if not elem.structured:
        raise PreconditionError("the connection acts on structured cokernel elements only")
    basis = coker_basis(ctx)
    out = {}
    for (i, j), c in elem.coeffs.items():
        if j == 0:
            raise PreconditionError(f"term a_{i + 1}*h^0 is not in the image of multiplication by h")
        r = Fraction(basis.degrees[i], ctx.delta)
        out[(i, j - 1)] = c * to_q(j + r)
    return CokerElement(out)


def structured_count(ctx: QHContext, m: int) -> int:
    """``#{(i, j) : pdeg(a_i) + j*delta = m + delta0}``."""
    return len(structured_terms(ctx, m + ctx.delta0, coker_basis(ctx)))
