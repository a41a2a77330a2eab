"""Plane vector fields, logarithmic fields/forms and the (X0, R) basis.

Every logarithmic field for the separatrix ``h0 = 0`` is written uniquely as
``a*X0 + b*R``; the coordinates ``(a, b)`` are recovered with the logarithmic
volume form ``Omega = dx^dy / h0``. Forms are kept as coordinates in the dual
pair ``(omega_0, omega_R) = (X0^sharp, R^sharp)`` and never materialized as
rational functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .errors import DivisionError, NotLogarithmicError, PreconditionError
from .grading import (
    Poly,
    Weights,
    graded_divide,
    homogeneous_degree,
    pdeg,
    radial_apply,
)


@dataclass(frozen=True)
class VField:
    """The vector field ``P d/dx + Q d/dy``."""

    P: Poly = field(default_factory=Poly)
    Q: Poly = field(default_factory=Poly)

    def __call__(self, f: Poly, w: Weights | None = None, maxdeg=None) -> Poly:
        """Lie derivative of the function ``f``."""
        return self.P.mul_trunc(f.diff_x(), w, maxdeg) + self.Q.mul_trunc(f.diff_y(), w, maxdeg)

    def __add__(self, other: "VField") -> "VField":
        return VField(self.P + other.P, self.Q + other.Q)

    def __sub__(self, other: "VField") -> "VField":
        return VField(self.P - other.P, self.Q - other.Q)

    def __neg__(self) -> "VField":
        return VField(-self.P, -self.Q)

    def __bool__(self):
        return bool(self.P) or bool(self.Q)

    def scale(self, c) -> "VField":
        return VField(self.P.scale(c), self.Q.scale(c))

    def mul(self, f: Poly, w: Weights | None = None, K=None) -> "VField":
        """The field ``f * self``, truncated at field degree ``K`` when given."""
        if K is None:
            return VField(f * self.P, f * self.Q)
        return VField(f.mul_trunc(self.P, w, K + w.p1), f.mul_trunc(self.Q, w, K + w.p2))

    def truncate(self, w: Weights, K) -> "VField":
        return VField(self.P.truncate(w, K + w.p1), self.Q.truncate(w, K + w.p2))

    def order(self, w: Weights):
        """Weighted order: a monomial ``x^a y^b d/dx`` has degree ``a*p1 + b*p2 - p1``."""
        degs = [pdeg(m, w) - w.p1 for m in self.P.terms]
        degs += [pdeg(m, w) - w.p2 for m in self.Q.terms]
        return min(degs, default=float("inf"))

    def degrees(self, w: Weights):
        degs = {pdeg(m, w) - w.p1 for m in self.P.terms}
        degs |= {pdeg(m, w) - w.p2 for m in self.Q.terms}
        return sorted(degs)

    def to_str(self, w: Weights | None = None) -> str:
        return f"({self.P.to_str(w)})*dx + ({self.Q.to_str(w)})*dy"


def radial_field(w: Weights) -> VField:
    return VField(Poly.monomial(1, 0, w.p1), Poly.monomial(0, 1, w.p2))


def lie_bracket(X: VField, Y: VField, w: Weights | None = None, K=None) -> VField:
    """``[X, Y]``; with ``w`` and ``K`` given, terms of field degree above ``K`` are dropped."""
    if K is None:
        return VField(X(Y.P) - Y(X.P), X(Y.Q) - Y(X.Q))
    kp, kq = K + w.p1, K + w.p2
    return VField(X(Y.P, w, kp) - Y(X.P, w, kp), X(Y.Q, w, kq) - Y(X.Q, w, kq))


def omega(X: VField, Y: VField, h0: Poly, w: Weights) -> Poly:
    """``(dx^dy / h0)(X, Y)``, which must be polynomial."""
    return graded_divide(X.P * Y.Q - X.Q * Y.P, h0, w)


def hamiltonian_x0(h: Poly, h0: Poly, w: Weights, grading: Weights | None = None) -> VField:
    """``X0 = h0/(delta*h) * (h_y d/dx - h_x d/dy)`` where ``delta`` is the degree of ``h``."""
    grading = grading or w
    delta = homogeneous_degree(h, w)
    if delta is None or delta == 0:
        raise PreconditionError("h must be quasi-homogeneous of positive degree")
    try:
        P = graded_divide(h0 * h.diff_y(), h, grading)
        Q = graded_divide(-(h0 * h.diff_x()), h, grading)
    except DivisionError as exc:
        raise PreconditionError(
            f"h0*grad(h) is not divisible by h: h and h0 do not share their zero set ({exc})"
        ) from exc
    return VField(P, Q).scale(mpq(1, delta))


@dataclass(frozen=True)
class QHContext:
    """A quasi-homogeneous initial field ``X0`` with its separatrix and truncation bound.

    ``weights`` define the radial field ``R``; ``grading`` (strictly positive,
    equal to ``weights`` unless one weight is zero) defines truncation degrees.
    """

    weights: Weights
    grading: Weights
    h: Poly
    h0: Poly
    x0: VField
    K: int
    delta: int
    d0: int
    delta0: int
    omega_x0_r: mpq
    hamiltonian: bool
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(
        cls,
        weights,
        h: Poly,
        h0: Optional[Poly] = None,
        K: int = 12,
        x0: Optional[VField] = None,
        grading=None,
    ) -> "QHContext":
        w = weights if isinstance(weights, Weights) else Weights(*weights)
        if grading is None:
            g = w if w.positive else Weights(1, 1)
        else:
            g = grading if isinstance(grading, Weights) else Weights(*grading)
        if not g.positive:
            raise PreconditionError("grading weights must be strictly positive")
        if not isinstance(K, int) or K < 1:
            raise PreconditionError(f"truncation bound must be a positive integer, got {K!r}")
        h0 = h if h0 is None else h0
        delta = homogeneous_degree(h, w)
        d0 = homogeneous_degree(h0, w)
        if delta is None or delta <= 0:
            raise PreconditionError(f"h = {h} is not quasi-homogeneous of positive degree for weights {tuple(w)}")
        if d0 is None or d0 <= 0:
            raise PreconditionError(f"h0 = {h0} is not quasi-homogeneous of positive degree for weights {tuple(w)}")
        for name, f in (("h", h), ("h0", h0)):
            if homogeneous_degree(f, g) is None:
                raise PreconditionError(f"{name} is not homogeneous for the grading {tuple(g)}")
        delta0 = d0 - w.p1 - w.p2
        hamiltonian = x0 is None
        if hamiltonian:
            _check_shared_zero_set(h, h0, g)
            x0 = hamiltonian_x0(h, h0, w, g)
        R = radial_field(w)
        degs = x0.degrees(g)
        if not x0:
            raise PreconditionError("X0 must be nonzero")
        if degs != [delta0]:
            raise PreconditionError(f"X0 must be homogeneous of degree {delta0} for the grading, has degrees {degs}")
        if lie_bracket(R, x0) != x0.scale(delta0):
            raise PreconditionError(f"[R, X0] != {delta0}*X0: X0 is not quasi-homogeneous for R")
        if x0(h):
            raise PreconditionError("h is not a first integral of X0")
        try:
            graded_divide(x0(h0), h0, g)
        except DivisionError as exc:
            raise PreconditionError("X0 is not tangent to the separatrix h0 = 0") from exc
        try:
            D = omega(x0, R, h0, g)
        except DivisionError as exc:
            raise PreconditionError("(X0, R) is not a basis of logarithmic fields") from exc
        if len(D) != 1 or D.constant_term == 0:
            raise PreconditionError(
                f"(X0, R) is not a basis of logarithmic fields: det/h0 = {D} is not a nonzero constant"
            )
        return cls(w, g, h, h0, x0, K, delta, d0, delta0, D.constant_term, hamiltonian)

    def with_truncation(self, K: int) -> "QHContext":
        return QHContext(
            self.weights, self.grading, self.h, self.h0, self.x0, K, self.delta,
            self.d0, self.delta0, self.omega_x0_r, self.hamiltonian,
        )

    @property
    def R(self) -> VField:
        return radial_field(self.weights)

    @property
    def isolated_hamiltonian(self) -> bool:
        return self.hamiltonian and self.h == self.h0

    @property
    def h_degree(self) -> int:
        """Degree of ``h`` for the truncation grading."""
        return homogeneous_degree(self.h, self.grading)

    def x0_apply(self, f: Poly, maxdeg=None) -> Poly:
        return self.x0(f, self.grading, maxdeg)

    def radial(self, f: Poly) -> Poly:
        return radial_apply(f, self.weights)


def _check_shared_zero_set(h: Poly, h0: Poly, g: Weights):
    if h == h0:
        return
    try:
        graded_divide(h, h0, g)
    except DivisionError as exc:
        raise PreconditionError("h0 must divide h (same zero set)") from exc
    n = homogeneous_degree(h, g)
    power = h0
    for _ in range(n):
        try:
            graded_divide(power, h, g)
            return
        except DivisionError:
            power = power * h0
    raise PreconditionError("h does not divide any power of h0: h and h0 do not share their zero set")


# -- logarithmic fields ----------------------------------------------------------


@dataclass(frozen=True)
class LogField:
    """The field ``a*X0 + b*R``."""

    a: Poly = field(default_factory=Poly)
    b: Poly = field(default_factory=Poly)

    def __add__(self, other):
        return LogField(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return LogField(self.a - other.a, self.b - other.b)

    def scale(self, c):
        return LogField(self.a.scale(c), self.b.scale(c))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def truncate(self, ctx: QHContext, K=None) -> "LogField":
        K = ctx.K if K is None else K
        return LogField(self.a.truncate(ctx.grading, K - ctx.delta0), self.b.truncate(ctx.grading, K))


@dataclass(frozen=True)
class LogForm:
    """The logarithmic 1-form ``c0*omega_0 + cR*omega_R``."""

    c0: Poly = field(default_factory=Poly)
    cR: Poly = field(default_factory=Poly)

    def pair(self, X: LogField, ctx: QHContext) -> Poly:
        # omega_0(X0) = 0, omega_0(R) = D, omega_R(X0) = -D, omega_R(R) = 0
        return (self.c0 * X.b - self.cR * X.a).scale(ctx.omega_x0_r)

    def as_rational(self, ctx: QHContext):
        """Numerators ``(F, G)`` of the form ``(F dx + G dy) / h0``."""
        x0, R = ctx.x0, ctx.R
        return (-(self.c0 * x0.Q + self.cR * R.Q), self.c0 * x0.P + self.cR * R.P)


def is_logarithmic(X: VField, ctx: QHContext) -> bool:
    try:
        graded_divide(X(ctx.h0), ctx.h0, ctx.grading)
    except DivisionError:
        return False
    return True


def to_log_basis(X: VField, ctx: QHContext) -> LogField:
    """Coordinates ``(a, b)`` of ``X = a*X0 + b*R``."""
    try:
        a = omega(X, ctx.R, ctx.h0, ctx.grading)
        b = omega(ctx.x0, X, ctx.h0, ctx.grading)
    except DivisionError as exc:
        raise NotLogarithmicError("field is not logarithmic for h0", degree=exc.degree) from exc
    inv = 1 / ctx.omega_x0_r
    return LogField(a.scale(inv), b.scale(inv))


def from_log_basis(L: LogField, ctx: QHContext) -> VField:
    return ctx.x0.mul(L.a) + ctx.R.mul(L.b)


def sharp(X: VField, ctx: QHContext) -> LogForm:
    """``i_X Omega`` in the basis ``(omega_0, omega_R)``."""
    L = to_log_basis(X, ctx)
    return LogForm(L.a, L.b)


def flat(form: LogForm, ctx: QHContext) -> VField:
    return from_log_basis(LogField(form.c0, form.cR), ctx)


def log_bracket(L1: LogField, L2: LogField, ctx: QHContext, K=None) -> LogField:
    """Bracket computed on coordinates, using ``[R, X0] = delta0*X0``.

    With ``K`` given, the ``X0``-coordinate is kept to degree ``K - delta0`` and
    the ``R``-coordinate to degree ``K``.
    """
    g = ctx.grading
    ka = None if K is None else K - ctx.delta0
    kb = K
    a1, b1, a2, b2 = L1.a, L1.b, L2.a, L2.b

    def x0(f, bound):
        return ctx.x0(f, g, bound)

    def mul(f, k, bound):
        return f.mul_trunc(k, g, bound) if bound is not None else f * k

    a = Poly()
    b = Poly()
    if a1:
        a = a + mul(a1, x0(a2, ka), ka)
        b = b + mul(a1, x0(b2, kb), kb)
        if b2:
            a = a - mul(b2, ctx.radial(a1), ka)
            if ctx.delta0:
                a = a - mul(a1, b2, ka).scale(ctx.delta0)
    if a2:
        a = a - mul(a2, x0(a1, ka), ka)
        b = b - mul(a2, x0(b1, kb), kb)
        if b1:
            a = a + mul(b1, ctx.radial(a2), ka)
            if ctx.delta0:
                a = a + mul(a2, b1, ka).scale(ctx.delta0)
    if b1 and b2:
        b = b + mul(b1, ctx.radial(b2), kb) - mul(b2, ctx.radial(b1), kb)
    return LogField(a, b)
