import math

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from _helpers import from_sympy, polys, qh_polys, to_sympy
from qhnf.errors import DivisionError, ParseError
from qhnf.grading import (
    Poly,
    Weights,
    canonical_key,
    format_poly,
    graded_divide,
    graded_slice,
    homogeneous_degree,
    monomials_of_degree,
    parse_poly,
    pdeg,
    porder,
    qh_components,
    radial_apply,
)

W23 = Weights(2, 3)
weights = st.sampled_from([Weights(1, 1), Weights(2, 3), Weights(3, 4), Weights(1, 2), Weights(3, 5)])


def test_pdeg_examples():
    assert pdeg((3, 0), W23) == 6
    assert pdeg((0, 2), W23) == 6


def test_weights_validation():
    with pytest.raises(ValueError):
        Weights(2, 4)
    with pytest.raises(ValueError):
        Weights(0, 0)
    assert not Weights(1, 0).positive


def test_monomials_of_degree_exact_and_ordered():
    assert monomials_of_degree(6, W23) == ((3, 0), (0, 2))
    for d in range(0, 25):
        got = monomials_of_degree(d, W23)
        brute = [(a, b) for a in range(d + 1) for b in range(d + 1) if 2 * a + 3 * b == d]
        assert sorted(got) == sorted(brute)
        assert list(got) == sorted(got, key=lambda m: canonical_key(m, W23))


def test_qh_components_examples():
    assert qh_components(Poly(), W23) == {}
    assert qh_components(parse_poly("x + y"), W23) == {2: parse_poly("x"), 3: parse_poly("y")}


def test_homogeneous_degree_examples():
    assert homogeneous_degree(parse_poly("x^2*y"), Weights(1, 1)) == 3
    assert homogeneous_degree(parse_poly("y^2 - x^3"), W23) == 6
    assert homogeneous_degree(parse_poly("x + y"), W23) is None


def test_porder_of_zero_is_infinite():
    assert porder(Poly(), W23) == math.inf
    assert porder(parse_poly("x^2 + y"), W23) == 3


def test_radial_apply_examples():
    assert radial_apply(Poly.const(1), W23) == Poly()
    assert radial_apply(parse_poly("x + y"), W23) == parse_poly("2*x + 3*y")


def test_parse_and_format():
    f = parse_poly("1/6*x^2*y - 3 + y^2 - x^3")
    assert f.coeff((2, 1)) == mpq(1, 6)
    assert f.constant_term == -3
    assert format_poly(f, W23) == "-3 - x^3 + y^2 + 1/6*x^2*y"
    assert format_poly(Poly(), W23) == "0"
    assert parse_poly("2*x*x") == parse_poly("2*x^2")


@pytest.mark.parametrize("text,column", [("x + * y", 5), ("x^", 3), ("1/0*x", 3), ("z", 1)])
def test_parse_errors_carry_column(text, column):
    with pytest.raises(ParseError) as err:
        parse_poly(text)
    assert err.value.column == column


def test_graded_divide():
    h = parse_poly("y^2 - x^3")
    f = parse_poly("x*y^2 - x^4 + 2*y^4 - 2*x^3*y^2")
    assert graded_divide(f, h, W23) == parse_poly("x + 2*y^2")
    with pytest.raises(DivisionError) as err:
        graded_divide(parse_poly("x*y"), parse_poly("x^2"), Weights(1, 1))
    assert err.value.degree == 2


@given(weights, st.integers(0, 12), st.integers(0, 12), st.data())
def test_product_of_quasi_homogeneous_is_quasi_homogeneous(w, k, l, data):
    f = data.draw(qh_polys(w, k))
    g = data.draw(qh_polys(w, l))
    prod = f * g
    if prod:
        assert homogeneous_degree(prod, w) == k + l


@given(weights, polys())
def test_radial_apply_is_diagonal_on_slices(w, f):
    Rf = radial_apply(f, w)
    for d in range(0, 40):
        s = graded_slice(f, d, w)
        assert graded_slice(Rf, d, w).coeffs == tuple(d * c for c in s.coeffs)


@given(weights, polys())
def test_components_sum_back(w, f):
    total = Poly()
    for comp in qh_components(f, w).values():
        total = total + comp
    assert total == f


@given(weights, polys())
def test_format_parse_round_trip_is_byte_identical(w, f):
    text = format_poly(f, w)
    again = parse_poly(text)
    assert again == f
    assert format_poly(again, w) == text


@given(polys(4, 4), polys(4, 4))
def test_arithmetic_matches_sympy(f, g):
    assert f * g == from_sympy(to_sympy(f) * to_sympy(g))
    assert f - g == from_sympy(to_sympy(f) - to_sympy(g))


@given(weights, polys(4, 5), polys(4, 5), st.integers(0, 20))
def test_truncated_product_is_truncation_of_product(w, f, g, K):
    assert f.mul_trunc(g, w, K) == (f * g).truncate(w, K)
