import random

import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from _helpers import cusp, frac, poincare_dulac, rand_perturbation, rand_q, rationals, saddle_node
from qhnf import series as S
from qhnf.errors import PreconditionError
from qhnf.finalred import (
    INTEGRABLE,
    OneVarField,
    coefficient_bound,
    compose_with_gauge,
    fibered_action,
    field_final_reduce,
    final_reduce,
    normal_coefficient,
    normalize_onevar,
    pull_back_onevar,
    residue,
)
from qhnf.grading import Poly, parse_poly
from qhnf.homological import h_power
from qhnf.logfields import QHContext
from qhnf.prenorm import ConjugationScript, exp_conjugate, prenormalize_field, prenormalize_foliation, verify_conjugacy

z = sp.symbols("z")


def field(coeffs, order):
    return OneVarField(order, tuple(mpq(c) for c in coeffs))


def sympy_residue(v: OneVarField):
    expr = sum(sp.Rational(frac(c).numerator, frac(c).denominator) * z ** (v.order + k) for k, c in enumerate(v.u))
    return sp.residue(1 / expr, z, 0)


def test_onevar_examples():
    r = normalize_onevar(field([1, 0, 0, 0], 2))
    assert (r.order, r.lam, r.steps) == (2, 0, ())
    assert list(r.phi) == S.identity(len(r.phi) - 1)
    r = normalize_onevar(field([1, 0, 0, 0, 0], 3))
    assert (r.order, r.lam, r.steps) == (3, 0, ())
    r = normalize_onevar(field([1, mpq(2, 3), 0, 0, 0], 2))
    assert r.lam == mpq(-2, 3)


def test_residue_examples():
    assert residue(field([1, 0, 0], 2)) == 0
    assert residue(field([1, 5, 0], 2)) == -5
    for k, lam in [(1, mpq(3, 4)), (2, mpq(-1, 5)), (3, mpq(2))]:
        v = OneVarField.from_coefficient(normal_coefficient(1, k + 1, lam, 3 * k + 3))
        assert residue(v) == lam


@given(rationals, st.lists(rationals, min_size=3, max_size=3))
def test_residue_against_sympy(c, tail):
    v = field([1, c] + tail, 2)
    assert residue(v) == -c
    assert sp.Rational(frac(residue(v)).numerator, frac(residue(v)).denominator) == sympy_residue(v)


@given(st.integers(2, 4), st.lists(rationals, min_size=8, max_size=8), st.data())
def test_residue_invariant_under_gauges(order, u, data):
    u[0] = u[0] or mpq(1)
    v = OneVarField(order, tuple(u))
    N = v.N
    j = data.draw(st.integers(1, 4))
    w = S.make({1 + j: data.draw(rationals)}, N)
    pulled = pull_back_onevar(w, v.coefficient(), N)
    assert residue(OneVarField.from_coefficient(pulled)) == residue(v)


@given(st.integers(2, 4), st.lists(rationals, min_size=10, max_size=10))
def test_normalize_onevar_shape_and_idempotence(order, u):
    u[0] = u[0] or mpq(1)
    v = OneVarField(order, tuple(u))
    r = normalize_onevar(v)
    assert r.lam == residue(v)
    assert r.field.coefficient() == normal_coefficient(u[0], order, r.lam, v.N)
    again = normalize_onevar(r.field)
    assert again.lam == r.lam and again.steps == ()
    # phi conjugates v to the normal form: v(phi) = phi' * normal
    lhs = S.compose(v.coefficient(), list(r.phi), v.N)
    rhs = S.mul(S.deriv(list(r.phi), v.N), r.field.coefficient(), v.N)
    assert lhs == rhs


def test_normalize_rejects_order_one():
    with pytest.raises(PreconditionError):
        normalize_onevar(field([1, 2], 1))


# -- fibered action ------------------------------------------------------------


def _prenormal(seed, ctx):
    return prenormalize_foliation(rand_perturbation(random.Random(seed), ctx), ctx)[0]


def test_fibered_action_identity():
    ctx = cusp(K=20)
    nf = _prenormal(1, ctx)
    assert fibered_action(nf, S.identity(6), ctx).rem == nf.rem


@pytest.mark.parametrize("seed", range(4))
def test_fibered_action_inverse(seed):
    ctx = cusp(K=24)
    rng = random.Random(seed)
    nf = _prenormal(seed, ctx)
    J = max(coefficient_bound(ctx, nf.basis, i, ctx.K) for i in range(nf.basis.mu)) + 1
    phi = S.make({1: 1, 2: rand_q(rng), 3: rand_q(rng)}, J)
    back = fibered_action(fibered_action(nf, phi, ctx), S.reversion(phi, J), ctx)
    assert back.rem == nf.rem


@pytest.mark.parametrize("j,c", [(1, mpq(1, 2)), (2, mpq(-3)), (1, mpq(-2, 5))])
def test_fibered_action_matches_planar_gauge(j, c):
    ctx = cusp(K=24)
    nf = _prenormal(3, ctx)
    Z = ctx.R.mul(h_power(ctx, j).scale(c))
    pulled = exp_conjugate(Z, nf.vfield(ctx), ctx.K, ctx.grading)
    nf2, script2, _ = prenormalize_foliation(pulled, ctx)
    assert script2.generators == ()
    # R(h) = delta*h, so the flow of c h^j R moves h along delta*c z^(1+j) d/dz
    J = 5
    phi = S.flow_map(S.make({1 + j: ctx.delta * c}, J), J)
    assert fibered_action(nf, phi, ctx).rem == nf2.rem


# -- reductions ----------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_cusp_reduction_shape_and_orbital_class(seed):
    ctx = cusp(K=24)
    nf = _prenormal(seed, ctx)
    for pick in range(nf.basis.mu):
        if not nf.d[pick]:
            continue
        red = final_reduce(nf, ctx, pick)
        rec = red.record
        assert rec.lam == 0 and (ctx.delta, rec.q) in ((6, -1), (6, 1))
        J = coefficient_bound(ctx, nf.basis, pick, ctx.K)
        expected = S.shift(normal_coefficient(rec.leading, 1 + rec.m + rec.n, rec.lam, J + 1 + rec.n), -(1 + rec.n), J)
        assert S.make(red.normal_form.d[pick], J) == expected
        script = compose_with_gauge(ConjugationScript(), nf, red, ctx)
        assert script.fibered
        assert verify_conjugacy(nf.vfield(ctx), script, red.normal_form, ctx)


def test_nonzero_residue_when_delta_divides_q():
    ctx = QHContext.build((1, 2), parse_poly("y^2 - x^4"), K=20)
    X = ctx.x0 + ctx.R.mul(parse_poly("x") * (ctx.h + (ctx.h * ctx.h).scale(3)))
    nf, script, _ = prenormalize_foliation(X, ctx)
    red = final_reduce(nf, ctx, 1)
    assert red.record.q == 0 and red.record.n == 0
    assert red.record.lam == -3
    full = compose_with_gauge(script, nf, red, ctx)
    assert verify_conjugacy(X, full, red.normal_form, ctx)


def test_integrable_and_bad_picks():
    ctx = cusp(K=18)
    nf, _, _ = prenormalize_foliation(ctx.x0, ctx)
    red = final_reduce(nf, ctx)
    assert red.record.status == INTEGRABLE and red.generators == ()
    nf = _prenormal(2, ctx)
    with pytest.raises(PreconditionError):
        final_reduce(nf, ctx, 5)


def test_saddle_node_already_normal():
    ctx = saddle_node(K=12)
    X = ctx.x0 + ctx.R.mul(parse_poly("x"))
    nf, script, _ = prenormalize_foliation(X, ctx)
    red = final_reduce(nf, ctx)
    assert red.record.lam == 0 and red.generators == ()
    nf, script = prenormalize_field(X, ctx)
    red = field_final_reduce(nf, ctx)
    assert red.record.lam == 0 and red.generators == ()


def test_field_reduction_of_x0_is_empty():
    ctx = poincare_dulac(1, 2, K=12)
    nf, _ = prenormalize_field(ctx.x0, ctx)
    red = field_final_reduce(nf, ctx)
    assert red.record.status == INTEGRABLE and red.generators == ()


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_field_reduction_round_trip(seed):
    rng = random.Random(seed)
    ctx = rng.choice([poincare_dulac(1, 1, 12), poincare_dulac(1, 2, 12), saddle_node(14)])
    X = rand_perturbation(rng, ctx)
    nf, script = prenormalize_field(X, ctx)
    red = field_final_reduce(nf, ctx)
    if red.record.status == INTEGRABLE:
        return
    full = compose_with_gauge(script, nf, red, ctx)
    assert verify_conjugacy(X, full, red.normal_form, ctx)
    m = red.record.m
    assert all(1 <= t <= m for t in red.normal_form.field_part.series(0))


def test_coefficient_bound():
    ctx = cusp(K=24)
    basis = _prenormal(0, ctx).basis
    assert [coefficient_bound(ctx, basis, i, 24) for i in range(2)] == [4, 3]
    assert h_power(ctx, 2) == ctx.h * ctx.h
    assert Poly.const(1) == h_power(ctx, 0)
