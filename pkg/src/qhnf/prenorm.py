"""Prenormalization of logarithmic perturbations of ``X0``.

Both loops work on the coordinates ``(A, B)`` of ``X = A*X0 + B*R`` and kill
one weighted degree per step by conjugating with ``exp(Z)``, where ``Z`` solves
the homological equation in that degree. The pullback convention is
``exp(Z)^* X = sum_k ad_Z^k(X) / k!`` with ``ad_Z(X) = [Z, X]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Tuple

from gmpy2 import mpq

from .errors import PreconditionError
from .grading import Poly, pdeg, porder
from .homological import CokerElement, resolve_mode, solve_x0, STRUCTURED
from .logfields import LogField, QHContext, VField, from_log_basis, lie_bracket, log_bracket, to_log_basis
from .milnor import CokerBasis, coker_basis


@dataclass(frozen=True)
class ConjugationScript:
    """Generators ``Z_1, Z_2, ...`` applied in order, and the unit of the target form.

    Pulling ``X`` back by ``exp(Z_1)``, then the result by ``exp(Z_2)`` and so on
    gives ``unit * N`` up to the truncation degree.
    """

    generators: Tuple[VField, ...] = ()
    unit: Poly = field(default_factory=lambda: Poly.const(1))
    fibered: bool = True


@dataclass(frozen=True)
class NormalForm:
    """``(1 + field_part)*X0 + sum_i d_i(h) a_i R`` truncated at degree ``K``.

    ``rem`` holds the ``d_i`` as a cokernel element; ``field_part`` is only set
    by the field pipeline. ``finalized`` records a final reduction.
    """

    basis: Optional[CokerBasis]
    rem: CokerElement
    K: int
    field_part: Optional[CokerElement] = None
    finalized: Optional[Any] = None

    @property
    def d(self):
        """One ``{power: coefficient}`` map per basis monomial."""
        if not self.rem.structured:
            raise PreconditionError("remainder is not in structured form")
        return [self.rem.series(i) for i in range(self.basis.mu)]

    def log_field(self, ctx: QHContext) -> LogField:
        a = Poly.const(1)
        if self.field_part is not None:
            a = a + self.field_part.materialize(ctx)
        return LogField(a, self.rem.materialize(ctx)).truncate(ctx, self.K)

    def vfield(self, ctx: QHContext, unit: Optional[Poly] = None) -> VField:
        L = self.log_field(ctx)
        if unit is not None:
            g, K = ctx.grading, self.K
            L = LogField(unit.mul_trunc(L.a, g, K - ctx.delta0), unit.mul_trunc(L.b, g, K))
        return from_log_basis(L, ctx).truncate(ctx.grading, self.K)


def exp_conjugate(Z: VField, X: VField, K: int, w) -> VField:
    """``exp(Z)^* X`` truncated at field degree ``K`` for the grading ``w``."""
    if not Z:
        return X.truncate(w, K)
    if Z.order(w) < 1:
        raise PreconditionError("generator must have weighted order at least 1")
    out = X.truncate(w, K)
    term = out
    k = 1
    while True:
        term = lie_bracket(Z, term, w, K).scale(mpq(1, k))
        if not term:
            return out
        out = out + term
        k += 1


def exp_conjugate_log(Z: LogField, L: LogField, ctx: QHContext, K: int) -> LogField:
    """Same pullback, computed on ``(X0, R)`` coordinates."""
    if not Z:
        return L
    if _log_order(Z, ctx) < 1:
        raise PreconditionError("generator must have weighted order at least 1")
    out = L.truncate(ctx, K)
    term = out
    k = 1
    while True:
        term = log_bracket(Z, term, ctx, K).scale(mpq(1, k))
        if not term:
            return out
        out = out + term
        k += 1


def _log_order(L: LogField, ctx: QHContext):
    return min(porder(L.a, ctx.grading) + ctx.delta0, porder(L.b, ctx.grading))


def _initial_checks(X, ctx: QHContext, K: int) -> LogField:
    L = X if isinstance(X, LogField) else to_log_basis(X, ctx)
    L = L.truncate(ctx, K)
    a0 = L.a.constant_term
    if a0 != 1:
        raise PreconditionError(f"X0-coordinate of the perturbation must start with 1, got {a0}")
    nb = porder(L.b, ctx.grading)
    if nb <= ctx.delta0:
        raise PreconditionError(
            f"R-coordinate must have weighted order above {ctx.delta0}, found a term of degree {nb}"
        )
    return L


def prenormalize_foliation(X, ctx: QHContext, K: Optional[int] = None, mode: Optional[str] = None):
    """Fibered conjugation of ``X`` to ``unit * (X0 + sum_i d_i(h) a_i R)``.

    Returns ``(normal_form, script, unit)``. Every generator is ``c*R``.
    """
    K = ctx.K if K is None else K
    mode = resolve_mode(ctx, mode)
    g, d0 = ctx.grading, ctx.delta0
    L = _initial_checks(X, ctx, K)
    R = ctx.R
    Y = CokerElement({}, mode == STRUCTURED)
    Ypoly = Poly()
    gens = []
    for n in range(d0 + 1, K + 1):
        # the unit is final below degree n - delta0, which is all this degree needs
        u = L.a.truncate(g, n - d0 - 1)
        residual = (L.b - u.mul_trunc(Ypoly, g, n)).part(g, n)
        if not residual:
            continue
        c, rem = solve_x0(residual, ctx, mode, K)
        if c:
            L = exp_conjugate_log(LogField(Poly(), c), L, ctx, K)
            gens.append(R.mul(c))
        if rem:
            Y = Y + rem
            Ypoly = Ypoly + rem.materialize(ctx)
    unit = L.a.truncate(g, K - d0)
    if (L.b - unit.mul_trunc(Ypoly, g, K)).truncate(g, K):
        raise AssertionError("internal error: R-coordinate not reduced")
    basis = coker_basis(ctx) if mode == STRUCTURED else None
    nf = NormalForm(basis, Y, K)
    return nf, ConjugationScript(tuple(gens), unit, True), unit


def prenormalize_field(X, ctx: QHContext, K: Optional[int] = None, mode: Optional[str] = None):
    """Conjugation (no unit) of ``X`` to ``(1 + alpha)*X0 + beta*R`` when ``delta0 = 0``.

    Returns ``(normal_form, script)``; ``normal_form.field_part`` is ``alpha``.
    """
    if ctx.delta0 != 0:
        raise PreconditionError(
            f"the field pipeline needs X0 of degree 0, this X0 has degree {ctx.delta0}; use the foliation pipeline"
        )
    K = ctx.K if K is None else K
    mode = resolve_mode(ctx, mode)
    g = ctx.grading
    L = _initial_checks(X, ctx, K)
    alpha = CokerElement({}, mode == STRUCTURED)
    beta = CokerElement({}, mode == STRUCTURED)
    apoly, bpoly = Poly.const(1), Poly()
    gens = []
    fibered = True
    for n in range(1, K + 1):
        ra = (L.a - apoly).part(g, n)
        rb = (L.b - bpoly).part(g, n)
        a, ra_rem = solve_x0(ra, ctx, mode, K)
        b, rb_rem = solve_x0(rb, ctx, mode, K)
        if a or b:
            Z = LogField(a, b)
            L = exp_conjugate_log(Z, L, ctx, K)
            gens.append(from_log_basis(Z, ctx))
            fibered = fibered and not a
        alpha, beta = alpha + ra_rem, beta + rb_rem
        apoly = apoly + ra_rem.materialize(ctx)
        bpoly = bpoly + rb_rem.materialize(ctx)
    if (L.a - apoly).truncate(g, K) or (L.b - bpoly).truncate(g, K):
        raise AssertionError("internal error: field not reduced")
    basis = coker_basis(ctx) if mode == STRUCTURED else None
    nf = NormalForm(basis, beta, K, field_part=alpha)
    return nf, ConjugationScript(tuple(gens), Poly.const(1), fibered)


@dataclass(frozen=True)
class Verification:
    """Outcome of an exact conjugacy check; truthy on success."""

    ok: bool
    degree: Optional[int] = None
    component: Optional[str] = None
    monomial: Optional[Tuple[int, int]] = None
    expected: Optional[mpq] = None
    found: Optional[mpq] = None

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        ex, ey = self.monomial
        return (
            f"mismatch in degree {self.degree}: coefficient of x^{ex}*y^{ey} in {self.component} "
            f"is {self.found}, expected {self.expected}"
        )


def pull_back(X: VField, generators, ctx: QHContext, K: int) -> VField:
    g = ctx.grading
    Y = X.truncate(g, K)
    for Z in generators:
        Y = exp_conjugate(Z, Y, K, g)
    return Y


def verify_conjugacy(
    X: VField,
    script: ConjugationScript,
    N,
    ctx: QHContext,
    K: Optional[int] = None,
    unit: Optional[Poly] = None,
) -> Verification:
    """Check ``exp(Z_k)^* ... exp(Z_1)^* X == unit * N`` exactly up to degree ``K``.

    ``N`` is a :class:`NormalForm` or a plain :class:`VField`; ``unit``
    defaults to the script's unit. The pullback is recomputed from scratch in
    ``(dx, dy)`` coordinates.
    """
    K = ctx.K if K is None else K
    g = ctx.grading
    unit = script.unit if unit is None else unit
    if isinstance(N, NormalForm):
        target = N.vfield(ctx)
    else:
        target = N
    target = target.mul(unit, g, K).truncate(g, K)
    got = pull_back(X, script.generators, ctx, K)
    diff = (got - target).truncate(g, K)
    if not diff:
        return Verification(True)
    best = None
    for comp, poly, shift, want, have in (
        ("dx", diff.P, g.p1, target.P, got.P),
        ("dy", diff.Q, g.p2, target.Q, got.Q),
    ):
        for m in poly.terms:
            key = (pdeg(m, g) - shift, comp != "dx", -m[0])
            if best is None or key < best[0]:
                best = (key, comp, m, want.coeff(m), have.coeff(m))
    (deg, _, _), comp, m, want, have = best
    return Verification(False, deg, comp, m, want, have)
