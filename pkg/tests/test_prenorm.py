import random

import pytest
import sympy as sp

from _helpers import X as SX, Y as SY, cusp, poincare_dulac, rand_perturbation, saddle_node, to_sympy
from qhnf.errors import PreconditionError
from qhnf.grading import Poly, parse_poly, pdeg
from qhnf.homological import CokerElement, h_power
from qhnf.logfields import VField, to_log_basis
from qhnf.prenorm import (
    ConjugationScript,
    NormalForm,
    exp_conjugate,
    prenormalize_field,
    prenormalize_foliation,
    verify_conjugacy,
)
from qhnf.milnor import coker_basis

t = sp.symbols("t")


def _wtrunc(expr, w, bound):
    """Drop terms of weighted degree (t ignored) above ``bound``."""
    p = sp.Poly(sp.expand(expr), SX, SY, t)
    return sum(c * SX**a * SY**b * t**k for (a, b, k), c in p.terms() if a * w[0] + b * w[1] <= bound)


def flow_pullback_residual(Z, X, result, w, K):
    """``D(Phi) * result - X o Phi`` for the time-one flow ``Phi`` of ``Z`` built by Picard iteration."""
    Zx, Zy = to_sympy(Z.P), to_sympy(Z.Q)
    bx, by = K + w[0], K + w[1]
    phi = (SX, SY)
    for _ in range(K + 2):
        fx = Zx.subs({SX: phi[0], SY: phi[1]}, simultaneous=True)
        fy = Zy.subs({SX: phi[0], SY: phi[1]}, simultaneous=True)
        phi = (
            SX + sp.integrate(_wtrunc(fx, w, bx), (t, 0, t)),
            SY + sp.integrate(_wtrunc(fy, w, by), (t, 0, t)),
        )
        phi = (_wtrunc(phi[0], w, bx), _wtrunc(phi[1], w, by))
    phi = (phi[0].subs(t, 1), phi[1].subs(t, 1))
    Rx, Ry = to_sympy(result.P), to_sympy(result.Q)
    Xx, Xy = to_sympy(X.P), to_sympy(X.Q)
    sub = {SX: phi[0], SY: phi[1]}
    lhs_x = sp.diff(phi[0], SX) * Rx + sp.diff(phi[0], SY) * Ry - Xx.subs(sub, simultaneous=True)
    lhs_y = sp.diff(phi[1], SX) * Rx + sp.diff(phi[1], SY) * Ry - Xy.subs(sub, simultaneous=True)
    return _wtrunc(lhs_x, w, bx), _wtrunc(lhs_y, w, by)


def test_exp_conjugate_matches_flow_pullback():
    ctx = cusp(K=7)
    Z = ctx.R.mul(parse_poly("x"))
    got = exp_conjugate(Z, ctx.x0, ctx.K, ctx.grading)
    rx, ry = flow_pullback_residual(Z, ctx.x0, got, (2, 3), ctx.K)
    assert sp.expand(rx) == 0 and sp.expand(ry) == 0


def test_exp_conjugate_flow_oracle_detects_errors():
    ctx = cusp(K=7)
    Z = ctx.R.mul(parse_poly("x"))
    got = exp_conjugate(Z, ctx.x0, ctx.K, ctx.grading)
    wrong = got + VField(parse_poly("x^3"), Poly())
    rx, _ = flow_pullback_residual(Z, ctx.x0, wrong, (2, 3), ctx.K)
    assert sp.expand(rx) != 0


def test_exp_conjugate_trivial_cases():
    ctx = cusp()
    g = ctx.grading
    X = rand_perturbation(random.Random(1), ctx)
    assert exp_conjugate(VField(Poly(), Poly()), X, ctx.K, g) == X
    # h*X0 commutes with X0
    assert exp_conjugate(ctx.x0.mul(ctx.h), ctx.x0, ctx.K, g) == ctx.x0
    with pytest.raises(PreconditionError):
        exp_conjugate(VField(Poly.const(1), Poly()), X, ctx.K, g)


def test_already_prenormal():
    ctx = cusp()
    X = ctx.x0 + ctx.R.mul(ctx.h)
    nf, script, unit = prenormalize_foliation(X, ctx)
    assert nf.rem.coeffs == {(0, 1): 1}
    assert nf.d == [{1: 1}, {}]
    assert script.generators == () and unit == Poly.const(1)


def test_initial_checks():
    ctx = cusp()
    with pytest.raises(PreconditionError):
        prenormalize_foliation(ctx.x0.scale(2), ctx)
    with pytest.raises(PreconditionError):
        prenormalize_foliation(ctx.x0 + ctx.R, ctx)
    with pytest.raises(PreconditionError):
        prenormalize_field(ctx.x0, ctx)


@pytest.mark.parametrize("seed", range(8))
def test_round_trip_and_fibered_generators(seed):
    ctx = cusp(K=20)
    X = rand_perturbation(random.Random(seed), ctx)
    nf, script, unit = prenormalize_foliation(X, ctx)
    assert verify_conjugacy(X, script, nf, ctx)
    for Z in script.generators:
        L = to_log_basis(Z, ctx)
        assert not L.a and Z == ctx.R.mul(L.b)


@pytest.mark.parametrize("seed", range(3))
def test_round_trip_other_singularities(seed):
    rng = random.Random(100 + seed)
    for ctx in (cusp(16, 3, 4), cusp(14, 1, 2), poincare_dulac(1, 2, 12)):
        X = rand_perturbation(rng, ctx)
        nf, script, _ = prenormalize_foliation(X, ctx)
        assert verify_conjugacy(X, script, nf, ctx)


def test_tampered_unit_fails_with_degree():
    ctx = cusp(K=16)
    X = rand_perturbation(random.Random(7), ctx)
    nf, script, unit = prenormalize_foliation(X, ctx)
    bad = ConjugationScript(script.generators, unit + Poly.monomial(2, 0, 1), True)
    check = verify_conjugacy(X, bad, nf, ctx)
    assert not check
    # x^2 has degree 4, so X0 of degree 1 is off in degree 5
    assert check.degree == 5
    assert "degree 5" in check.describe()


def test_hand_built_certificate():
    ctx = cusp(K=16)
    g = ctx.grading
    target = ctx.x0 + ctx.R.mul(ctx.h)
    assert verify_conjugacy(target, ConjugationScript(), NormalForm(coker_basis(ctx), CokerElement({(0, 1): 1}), ctx.K), ctx)
    # conjugate backwards by exp(-Z), then certify with exp(Z)
    Z = ctx.R.mul(parse_poly("x - 1/2*y"))
    X = exp_conjugate(Z.scale(-1), target, ctx.K, g)
    assert X != target
    assert verify_conjugacy(X, ConjugationScript((Z,)), target, ctx)
    assert not verify_conjugacy(X, ConjugationScript((Z.scale(2),)), target, ctx)


def test_prefix_stability_under_larger_truncation():
    X = rand_perturbation(random.Random(11), cusp(K=24), K=24)
    small, large = cusp(K=14), cusp(K=24)
    nf_s, script_s, unit_s = prenormalize_foliation(X.truncate(small.grading, 14), small)
    nf_l, script_l, unit_l = prenormalize_foliation(X, large)
    basis = nf_l.basis
    low = {k: v for k, v in nf_l.rem.coeffs.items() if pdeg(basis.monomials[k[0]], large.grading) + 6 * k[1] <= 14}
    assert nf_s.rem.coeffs == low
    assert unit_l.truncate(large.grading, 14 - large.delta0) == unit_s
    assert script_l.generators[: len(script_s.generators)] == script_s.generators


def test_field_pipeline_x0_is_fixed():
    ctx = poincare_dulac(1, 2, K=12)
    nf, script = prenormalize_field(ctx.x0, ctx)
    assert not nf.rem and not nf.field_part
    assert script.generators == ()


@pytest.mark.parametrize("seed", range(4))
def test_field_pipeline_remainders_are_structured(seed):
    rng = random.Random(seed)
    for ctx in (poincare_dulac(1, 1, 12), poincare_dulac(2, 3, 16), saddle_node(12)):
        X = rand_perturbation(rng, ctx)
        nf, script = prenormalize_field(X, ctx)
        for part in (nf.rem, nf.field_part):
            assert part.structured
            assert all(i == 0 for i, _ in part.coeffs)
        # powers of h only: the remainders are first integrals
        assert not ctx.x0_apply(nf.rem.materialize(ctx))
        assert not ctx.x0_apply(nf.field_part.materialize(ctx))
        assert verify_conjugacy(X, script, nf, ctx)


@pytest.mark.parametrize("seed", range(4))
def test_gauge_orbit_stays_prenormal(seed):
    rng = random.Random(seed)
    ctx = cusp(K=20)
    nf, _, _ = prenormalize_foliation(rand_perturbation(rng, ctx), ctx)
    c = sum((h_power(ctx, j).scale(rng.randint(-4, 4)) for j in (1, 2)), Poly())
    N = exp_conjugate(ctx.R.mul(c), nf.vfield(ctx), ctx.K, ctx.grading)
    nf2, script2, unit2 = prenormalize_foliation(N, ctx)
    # already a unit times a prenormal form: nothing left for X0 to absorb
    assert script2.generators == ()
    assert verify_conjugacy(N, script2, nf2, ctx)
