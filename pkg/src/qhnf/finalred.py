"""Final reduction of prenormal forms by fibered gauges ``exp(b(h) R)``.

A fibered gauge acts on ``h`` through a one-variable diffeomorphism ``phi``
and on each coefficient ``d_i`` like a (possibly ramified) vector field
``z^(1 + q_i/delta) d_i(z) d/dz``. One coefficient is normalized by the
classical degree-by-degree reduction of a one-variable field; when
``delta`` does not divide ``q_i`` the reduction runs on the cover
``z = w^delta`` with steps that descend to ``z``.

Leading coefficients are kept: a tangent-to-identity gauge cannot rescale
them, so the normalized coefficient reads ``c h^m / (1 + c lam h^(m+n))``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple, Union

from gmpy2 import mpq

from . import series as S
from .errors import PreconditionError
from .grading import Poly, pdeg
from .homological import CokerElement, h_power
from .logfields import LogField, QHContext, VField, to_log_basis
from .prenorm import ConjugationScript, NormalForm, exp_conjugate_log

INTEGRABLE = "integrable"
REDUCED = "reduced"


@dataclass(frozen=True)
class OneVarField:
    """``z^order * u(z) d/dz`` with ``u(0) != 0``, known up to ``z^(order + len(u) - 1)``.

    ``cover`` is the exponent ``s`` of the cover the field lives on: only
    powers ``z^(order + s*i)`` occur and gauge steps keep that symmetry.
    """

    order: int
    u: Tuple[mpq, ...]
    cover: int = 1

    def __post_init__(self):
        if not self.u or not self.u[0]:
            raise PreconditionError("u(0) must be nonzero")
        if self.order < 1 or self.cover < 1:
            raise PreconditionError("order and cover exponent must be positive")

    @property
    def N(self) -> int:
        """Highest known power of ``z`` in the coefficient."""
        return self.order + len(self.u) - 1

    def coefficient(self) -> List[mpq]:
        return S.shift(list(self.u), self.order, self.N)

    @classmethod
    def from_coefficient(cls, f, cover: int = 1) -> "OneVarField":
        k = S.valuation(f)
        if k == float("inf"):
            raise PreconditionError("zero field")
        return cls(k, tuple(f[k:]), cover)


@dataclass(frozen=True)
class OneVarNormalization:
    order: int
    lam: mpq
    phi: Tuple[mpq, ...]
    steps: Tuple[Tuple[int, mpq], ...]
    leading: mpq
    field: OneVarField


def residue(v: OneVarField) -> mpq:
    """Coefficient of ``z^-1`` in ``dz / v``."""
    k = v.order - 1
    if k >= len(v.u):
        raise PreconditionError("field is not known to high enough order for its residue")
    return S.inverse(list(v.u), k)[k]


def _bracket(w, f, N):
    # [w d/dz, f d/dz] = (w f' - f w') d/dz
    return S.add(S.mul(w, S.deriv(f, N), N), S.scale(S.mul(f, S.deriv(w, N), N), -1, N), N)


def pull_back_onevar(w, f, N):
    """``exp(W)^* (f d/dz)`` for ``W = w d/dz`` of order at least 2."""
    out = list(f)
    term = list(f)
    k = 1
    while True:
        term = S.scale(_bracket(w, term, N), mpq(1, k), N)
        if not any(term):
            return out
        out = S.add(out, term, N)
        k += 1


def normal_coefficient(leading, order: int, lam, N: int) -> List[mpq]:
    """Coefficient of ``a z^(k+1) / (1 + a lam z^k)``, ``k = order - 1``."""
    a, k = mpq(leading), order - 1
    denom = S.make({0: 1}, N)
    if k <= N:
        denom[k] += a * lam
    return S.shift(S.scale(S.inverse(denom, N), a, N), order, N)


def normalize_onevar(v: OneVarField, K: Optional[int] = None) -> OneVarNormalization:
    """Conjugate ``v`` to ``a z^(k+1) / (1 + a lam z^k) d/dz`` with a tangent-to-identity ``phi``.

    Each step ``exp(c z^(1+j) d/dz)`` changes the coefficient of ``z^(k+1+j)``
    by ``c a (k - j)`` and leaves lower ones alone; ``j = k`` is the residue slot.
    """
    if v.order < 2:
        raise PreconditionError("one-variable reduction needs a field of order at least 2")
    N = v.N if K is None else min(K, v.N)
    f = S.make(v.coefficient(), N)
    k, a, s = v.order - 1, v.u[0], v.cover
    lam = mpq(0)
    steps = []
    for j in range(1, N - v.order + 1):
        if j % s:
            continue
        pos = v.order + j
        if j == k:
            lam = -f[pos] / (a * a)
            continue
        target = a * (-a * lam) ** (j // k) if j % k == 0 else mpq(0)
        c = (target - f[pos]) / (a * (k - j))
        if c:
            w = S.make({1 + j: c}, N)
            f = pull_back_onevar(w, f, N)
            steps.append((j, c))
    phi = S.identity(N)
    for j, c in steps:
        phi = S.compose(phi, S.flow_map(S.make({1 + j: c}, N), N), N)
    return OneVarNormalization(v.order, lam, tuple(phi), tuple(steps), a, OneVarField.from_coefficient(f, s))


# -- action on prenormal forms ---------------------------------------------------


def _q(ctx: QHContext, basis, i: int) -> int:
    return pdeg(basis.monomials[i], ctx.weights) - ctx.delta0


def coefficient_bound(ctx: QHContext, basis, i: int, K: int) -> int:
    """Highest power ``j`` of ``h`` with ``a_i h^j`` inside the truncation."""
    return (K - pdeg(basis.monomials[i], ctx.grading)) // ctx.h_degree


def fibered_action(nf: NormalForm, phi, ctx: QHContext) -> NormalForm:
    """Transform every ``d_i`` by ``d_i(phi) (phi/h)^(1 + q_i/delta) / phi'``.

    This is the prenormal form of the pullback by the fibered gauge with
    ``h o Phi = phi o h``, after dividing by the unit ``(phi/h)^(delta0/delta)``.
    Rational powers are taken as binomial series of ``phi/h``, which have
    constant term 1.
    """
    phi = list(phi)
    if len(phi) < 2 or phi[0] != 0 or phi[1] != 1:
        raise PreconditionError("gauge must be tangent to the identity: phi(0) = 0, phi'(0) = 1")
    if nf.basis is None:
        raise PreconditionError("fibered action needs a structured prenormal form")
    basis = nf.basis
    coeffs = {}
    for i, d in enumerate(nf.d):
        J = coefficient_bound(ctx, basis, i, nf.K)
        if J < 0 or not d:
            continue
        ph = S.make(phi, J + 1)
        ratio = S.shift(ph, -1, J)
        dser = S.compose(S.make(d, J), ph, J)
        expo = 1 + mpq(_q(ctx, basis, i), ctx.delta)
        out = S.mul(S.mul(dser, S.power(ratio, expo, J), J), S.inverse(S.deriv(ph, J), J), J)
        coeffs.update({(i, j): c for j, c in enumerate(out) if c})
    return replace(nf, rem=CokerElement(coeffs), finalized=None)


@dataclass(frozen=True)
class Finalized:
    """Record of a final reduction.

    ``status`` is ``"reduced"`` or ``"integrable"``; the other fields describe
    the normalized coefficient ``c h^m / (1 + c lam h^(m+n))`` of ``a_index``.
    """

    status: str
    index: Optional[int] = None
    m: Optional[int] = None
    n: Optional[int] = None
    lam: mpq = mpq(0)
    leading: Optional[mpq] = None
    q: Optional[int] = None
    cover: int = 1
    x0_degree: Optional[int] = None
    delta: Optional[int] = None

    @property
    def rotation_order(self) -> Optional[int]:
        """Order of the cyclic group of rotations of the cover variable fixing the lifted normal form.

        The reduction leaves this residual freedom (together with the flow of
        the normal form itself) unnormalized.
        """
        if self.status != REDUCED:
            return None
        return self.q + self.delta * self.m


@dataclass(frozen=True)
class FinalReduction:
    normal_form: NormalForm
    generators: Tuple[VField, ...]
    phi: Tuple[mpq, ...]
    record: Finalized


def _normalize_coefficient(ctx: QHContext, nf: NormalForm, i: int):
    basis = nf.basis
    d = nf.d[i]
    m = min(d)
    c = d[m]
    q = _q(ctx, basis, i)
    delta = ctx.delta
    J = coefficient_bound(ctx, basis, i, nf.K)
    u = [d.get(m + t, mpq(0)) for t in range(J - m + 1)]
    if q % delta == 0:
        s, n = 1, q // delta
        v = OneVarField(1 + n + m, tuple(u), 1)
    else:
        s, n = delta, 0
        lifted = [mpq(0)] * (delta * (J - m) + 1)
        for t, coef in enumerate(u):
            lifted[delta * t] = coef
        v = OneVarField(1 + q + delta * m, tuple(lifted), delta)
    red = normalize_onevar(v)
    # cover step c w^(1+j) d/dw is s*c z^(1+j/s) d/dz on z = w^s, i.e. b(h) R with b = s*c/delta * h^(j/s)
    steps = [(j // s, s * c) for j, c in red.steps]
    Jmax = max(coefficient_bound(ctx, basis, t, nf.K) for t in range(basis.mu)) + 1
    phi = S.identity(Jmax)
    for e, sc in steps:
        phi = S.compose(phi, S.flow_map(S.make({1 + e: sc}, Jmax), Jmax), Jmax)
    gens = tuple(ctx.R.mul(h_power(ctx, e).scale(sc / delta)) for e, sc in steps)
    record = Finalized(REDUCED, i, m, n, red.lam, c, q, s, delta=delta)
    return gens, tuple(phi), record


def _pick_index(nf: NormalForm, pick: Union[int, str, None]) -> Optional[int]:
    ds = nf.d
    if pick in (None, "first-nonzero"):
        return next((i for i, d in enumerate(ds) if d), None)
    if not isinstance(pick, int) or not 0 <= pick < len(ds):
        raise PreconditionError(f"pick must be a basis index in 0..{len(ds) - 1}, got {pick!r}")
    if not ds[pick]:
        raise PreconditionError(f"coefficient d_{pick + 1} vanishes up to the truncation; pick a nonzero one")
    return pick


def final_reduce(nf: NormalForm, ctx: QHContext, pick: Union[int, str, None] = None) -> FinalReduction:
    """Normalize one coefficient ``d_i`` (0-based ``pick``, default first nonzero).

    An all-zero form is returned unchanged with status ``"integrable"``.
    """
    if nf.basis is None:
        raise PreconditionError("final reduction needs a structured prenormal form")
    i = _pick_index(nf, pick)
    if i is None:
        return FinalReduction(replace(nf, finalized=Finalized(INTEGRABLE)), (), tuple(S.identity(1)), Finalized(INTEGRABLE))
    gens, phi, record = _normalize_coefficient(ctx, nf, i)
    out = fibered_action(nf, phi, ctx)
    J = coefficient_bound(ctx, nf.basis, i, nf.K)
    expected = S.shift(normal_coefficient(record.leading, 1 + record.m + record.n, record.lam, J + 1 + record.n), -(1 + record.n), J)
    got = S.make(out.rem.series(i), J)
    if got != expected:
        raise AssertionError("internal error: normalized coefficient does not have the rational shape")
    out = replace(out, finalized=record)
    return FinalReduction(out, gens, phi, record)


def field_final_reduce(nf: NormalForm, ctx: QHContext) -> FinalReduction:
    """Reduce ``(1 + alpha) X0 + beta R`` to ``P_m(h) X0 + c h^m / (1 + c lam h^m) R``.

    First ``beta`` is normalized by a fibered gauge (which turns ``1 + alpha``
    into ``a2 = (1 + alpha) o phi``), then ``exp(gamma(h) X0)`` removes the
    part of ``a2`` above ``h^m`` using
    ``exp(gamma X0)^* (a X0 + b R) = (a - delta h b gamma') X0 + b R``.
    """
    if nf.field_part is None or ctx.delta0 != 0:
        raise PreconditionError("field final reduction needs the output of the field pipeline (delta0 = 0)")
    if nf.basis is None or nf.basis.mu != 1:
        raise PreconditionError("field final reduction needs the cokernel basis {1}")
    if not nf.rem:
        rec = Finalized(INTEGRABLE)
        return FinalReduction(replace(nf, finalized=rec), (), tuple(S.identity(1)), rec)
    gens, phi, record = _normalize_coefficient(ctx, nf, 0)
    J = coefficient_bound(ctx, nf.basis, 0, nf.K)
    stage1 = fibered_action(nf, phi, ctx)
    a1 = S.make({0: 1, **nf.field_part.series(0)}, J)
    a2 = S.compose(a1, S.make(phi, J), J)
    m, c, lam = record.m, record.leading, record.lam
    # gamma' = v (1 + c lam h^m) / (delta c) where a2 = P_m + h^(m+1) v
    v = S.shift(S.make({t: a2[t] for t in range(m + 1, J + 1)}, J), -(m + 1), J)
    corr = S.make({0: 1}, J)
    if m <= J:
        corr[m] += c * lam
    gprime = S.scale(S.mul(v, corr, J), 1 / (ctx.delta * c), J)
    gamma = S.integrate(gprime, J)
    gens = list(gens)
    if any(gamma):
        gpoly = sum((h_power(ctx, e).scale(g) for e, g in enumerate(gamma) if g), Poly())
        gens.append(ctx.x0.mul(gpoly))
    pm = {t: a2[t] for t in range(1, min(m, J) + 1) if a2[t]}
    record = replace(record, x0_degree=m)
    out = replace(stage1, field_part=CokerElement({(0, t): c_ for t, c_ in pm.items()}), finalized=record)
    return FinalReduction(out, tuple(gens), phi, record)


def compose_with_gauge(
    script: ConjugationScript, nf: NormalForm, red: FinalReduction, ctx: QHContext
) -> ConjugationScript:
    """Append the gauge generators to a prenormalizing script and recompute the unit.

    The prenormal form times the old unit is pulled back through the gauge in
    ``(X0, R)`` coordinates; the ``X0``-coordinate of the result is the new unit
    and its ``R``-coordinate must equal the unit times the reduced form.
    """
    if not red.generators:
        return script
    K, g = nf.K, ctx.grading
    L = nf.log_field(ctx)
    L = LogField(script.unit.mul_trunc(L.a, g, K - ctx.delta0), script.unit.mul_trunc(L.b, g, K))
    for Z in red.generators:
        L = exp_conjugate_log(to_log_basis(Z, ctx), L, ctx, K)
    target = red.normal_form.log_field(ctx)
    fibered = script.fibered and all(not to_log_basis(Z, ctx).a for Z in red.generators)
    if red.normal_form.field_part is None:
        unit = L.a
        if (L.b - unit.mul_trunc(target.b, g, K)).truncate(g, K):
            raise AssertionError("internal error: gauge and fibered action disagree")
    else:
        unit = script.unit
        if (L - target.truncate(ctx, K)).truncate(ctx, K):
            raise AssertionError("internal error: field gauge does not reach the reduced form")
    return ConjugationScript(script.generators + tuple(red.generators), unit.truncate(g, K - ctx.delta0), fibered)
