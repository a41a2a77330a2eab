"""Jacobian ideal, Milnor number and a monomial basis of the Milnor algebra.

The Jacobian ideal of a quasi-homogeneous ``h`` is graded, so the quotient
``O_2 / (h_x, h_y)`` is computed slice by slice: the degree-``m`` multiples of
``h_x`` and ``h_y`` are row-reduced and the complement is filled greedily by
monomials in canonical order. For an isolated singularity the quotient
vanishes above the socle degree ``(delta - 2 p1) + (delta - 2 p2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from ._linalg import Echelon
from .errors import NonIsolatedError, PreconditionError
from .grading import Monomial, Poly, homogeneous_degree, monomials_of_degree, pdeg
from .logfields import QHContext


@dataclass(frozen=True)
class CokerBasis:
    """Monomials ``a_1 = 1, ..., a_mu`` spanning ``Coker(X0)`` over ``Q[[h]]``.

    ``degrees`` are the weighted degrees ``k_i p1 + l_i p2`` for the radial
    weights; ``r_i = degrees[i] / delta`` is kept as an exact fraction.
    """

    monomials: Tuple[Monomial, ...]
    mu: int
    degrees: Tuple[int, ...]
    delta: int

    @property
    def exponents(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(d, self.delta) for d in self.degrees)

    def poly(self, i: int) -> Poly:
        return Poly.monomial(*self.monomials[i])


def jacobian_ideal(ctx: QHContext) -> Tuple[Poly, Poly]:
    if not ctx.isolated_hamiltonian:
        raise PreconditionError("the Jacobian ideal pipeline needs h = h0 with X0 built from h")
    return ctx.h.diff_x(), ctx.h.diff_y()


def socle_bound(ctx: QHContext) -> int:
    w = ctx.weights
    return (ctx.delta - 2 * w.p1) + (ctx.delta - 2 * w.p2)


def jacobian_slice(ctx: QHContext, m: int) -> Echelon:
    """Echelon basis of the degree-``m`` part of the Jacobian ideal."""
    key = ("jac", m)
    if key in ctx._cache:
        return ctx._cache[key]
    w = ctx.weights
    monos = monomials_of_degree(m, w)
    index = {mono: k for k, mono in enumerate(monos)}
    ech = Echelon(len(monos))
    for g in (ctx.h.diff_x(), ctx.h.diff_y()):
        dg = homogeneous_degree(g, w)
        if dg is None:
            continue
        for mono in monomials_of_degree(m - dg, w):
            vec = [0] * len(monos)
            for (a, b), c in g.terms.items():
                vec[index[(a + mono[0], b + mono[1])]] = c
            ech.insert(vec)
    ctx._cache[key] = ech
    return ech


def complement_slice(ctx: QHContext, m: int) -> List[Monomial]:
    """Monomials of degree ``m`` completing the Jacobian slice, chosen greedily."""
    monos = monomials_of_degree(m, ctx.weights)
    ech = jacobian_slice(ctx, m)
    # work on a copy: the cached echelon must stay the ideal itself
    probe = Echelon(ech.n)
    probe.rows = dict(ech.rows)
    chosen = []
    for k, mono in enumerate(monos):
        unit = [0] * len(monos)
        unit[k] = 1
        if probe.insert(unit):
            chosen.append(mono)
    return chosen


def poincare_count(ctx: QHContext) -> Optional[Fraction]:
    """``prod (delta - p_i) / p_i``, the Milnor number of an isolated quasi-homogeneous ``h``."""
    w = ctx.weights
    if not w.positive:
        return None
    return Fraction((ctx.delta - w.p1) * (ctx.delta - w.p2), w.p1 * w.p2)


def _scan(ctx: QHContext):
    if not ctx.isolated_hamiltonian or not ctx.weights.positive:
        return None, False
    B = socle_bound(ctx)
    basis = []
    for m in range(0, max(B, -1) + 1):
        basis.extend(complement_slice(ctx, m))
    w = ctx.weights
    tail_empty = all(not complement_slice(ctx, m) for m in range(max(B, -1) + 1, B + w.p1 + w.p2 + 1))
    ok = tail_empty and Fraction(len(basis)) == poincare_count(ctx)
    return basis, ok


def is_isolated(ctx: QHContext) -> bool:
    """True when the Milnor algebra of ``h`` is finite and has the expected dimension."""
    key = ("isolated",)
    if key not in ctx._cache:
        ctx._cache[key] = _scan(ctx)[1]
    return ctx._cache[key]


def milnor_basis(ctx: QHContext) -> CokerBasis:
    key = ("milnor",)
    if key in ctx._cache:
        return ctx._cache[key]
    if not ctx.isolated_hamiltonian:
        raise PreconditionError("the Milnor basis needs h = h0 with X0 built from h")
    basis, ok = _scan(ctx)
    if not ok:
        raise NonIsolatedError(
            f"h = {ctx.h.to_str(ctx.weights)} does not have an isolated singularity: the Milnor "
            "algebra does not vanish above the socle degree; this pipeline requires an isolated "
            "quasi-homogeneous first integral"
        )
    result = CokerBasis(
        tuple(basis), len(basis), tuple(pdeg(m, ctx.weights) for m in basis), ctx.delta
    )
    ctx._cache[key] = result
    return result


def x0_is_diagonal(ctx: QHContext) -> bool:
    x0 = ctx.x0
    return set(x0.P.terms) <= {(1, 0)} and set(x0.Q.terms) <= {(0, 1)}


def coker_basis(ctx: QHContext) -> Optional[CokerBasis]:
    """The structured basis of ``Coker(X0)`` over ``Q[[h]]``, or None if unknown.

    Isolated Hamiltonian case: the Milnor basis. Diagonal ``X0`` with a monomial
    first integral: the basis ``{1}``, after checking degree-wise up to ``K``
    that the kernel monomials of ``X0`` are exactly the powers of ``h``.
    """
    key = ("coker",)
    if key in ctx._cache:
        return ctx._cache[key]
    result = None
    if ctx.isolated_hamiltonian and is_isolated(ctx):
        result = milnor_basis(ctx)
    elif x0_is_diagonal(ctx) and len(ctx.h) == 1:
        (hm,) = ctx.h.terms
        g = ctx.grading
        lam_x = ctx.x0.P.coeff((1, 0))
        lam_y = ctx.x0.Q.coeff((0, 1))
        ok = True
        for d in range(ctx.K + 1):
            for a, b in monomials_of_degree(d, g):
                in_kernel = lam_x * a + lam_y * b == 0
                is_power = _is_power_of((a, b), hm)
                if in_kernel != is_power:
                    ok = False
        if ok:
            result = CokerBasis(((0, 0),), 1, (0,), ctx.delta)
    ctx._cache[key] = result
    return result


def _is_power_of(m: Monomial, base: Monomial) -> bool:
    if m == (0, 0):
        return True
    ks = {m[i] // base[i] if base[i] else None for i in range(2)}
    for i in range(2):
        if base[i] == 0 and m[i] != 0:
            return False
        if base[i] and m[i] % base[i]:
            return False
    ks.discard(None)
    return len(ks) == 1
