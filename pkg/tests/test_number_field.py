from fractions import Fraction
from math import isqrt

import pytest
from hypothesis import given, settings, strategies as st

from bcwitt.core_arith import IntPolynomial
from bcwitt.errors import MathInputError
from bcwitt.field_data import load_field
from bcwitt.ideal_arith import parse_ideal
from bcwitt.number_field import (
    class_number,
    embeddings,
    field_from_string,
    is_totally_positive,
    make_field,
    minkowski_bound,
    narrow_class_number,
    narrow_class_number_real,
    norm_trace,
    pell_unit,
    unit_image_mod,
)


@pytest.mark.parametrize(
    "poly, disc, signature, h, h_plus",
    [
        ("x", 1, (1, 0), 1, 1),
        ("x^2+1", -4, (0, 1), 1, 1),
        ("x^2+3", -3, (0, 1), 1, 1),
        ("x^2+5", -20, (0, 1), 2, 2),
        ("x^2-3", 12, (2, 0), 1, 2),
        ("x^2-5", 5, (2, 0), 1, 1),
        ("x^2-2", 8, (2, 0), 1, 1),
    ],
)
def test_quadratic_invariants(poly, disc, signature, h, h_plus):
    K = field_from_string(poly)
    assert K.discriminant == disc
    assert K.signature == signature
    assert class_number(K) == h
    assert narrow_class_number(K) == h_plus


def test_torsion_orders():
    assert field_from_string("x^2+1").units.torsion_order == 4
    assert field_from_string("x^2+3").units.torsion_order == 6
    assert field_from_string("x^2+5").units.torsion_order == 2


def test_real_quadratic_units_are_units():
    for poly in ("x^2-2", "x^2-3", "x^2-5", "x^2-13"):
        K = field_from_string(poly)
        (eps,) = K.units.fundamental
        assert abs(eps.norm()) == 1
        assert eps.is_integral()


def test_golden_ratio_unit():
    K = field_from_string("x^2-5")
    (eps,) = K.units.fundamental
    assert eps.norm() == -1
    assert eps.trace() == 1


def test_pell_and_narrow_forms():
    assert pell_unit(2) == (1, 1)
    assert pell_unit(3) == (2, 1)
    assert narrow_class_number_real(12) == 2
    assert narrow_class_number_real(5) == 1


def test_reducible_polynomial_rejected():
    with pytest.raises(MathInputError, match="reducible"):
        field_from_string("x^2-x")
    with pytest.raises(MathInputError):
        make_field(IntPolynomial.parse("2*x^2+1"))


def test_degree_three_needs_data():
    with pytest.raises(MathInputError):
        make_field(IntPolynomial.parse("x^3+x^2-2*x-1"))


def test_element_arithmetic():
    K = field_from_string("x^2+1")
    x = K.parse_element("1+t")
    assert x.norm() == 2
    assert x.trace() == 2
    assert x * x.inverse() == K.one
    assert (x ** 2) == K.parse_element("2*t")
    assert (x ** -1) * x == K.one
    assert str(K.parse_element("3-2*t")) == "3-2*t"


def test_half_integral_element():
    K = field_from_string("x^2+3")
    w = K.parse_element("(1+t)/2")
    assert w.is_integral()
    assert w ** 6 == K.one
    assert not K.parse_element("t/2").is_integral()


def test_total_positivity():
    K = field_from_string("x^2-3")
    assert K.parse_element("t").sign_vector() == (-1, 1)
    assert is_totally_positive(K.parse_element("2+t"))
    assert not is_totally_positive(K.parse_element("-1"))
    # 実素点がなければ 0 以外はすべて総正
    assert is_totally_positive(field_from_string("x^2+1").parse_element("-1"))
    with pytest.raises(MathInputError):
        is_totally_positive(K.zero)


def test_same_string_same_field():
    assert field_from_string("x^2+1") is field_from_string("x^2+1")


def test_minkowski_bound_gaussian():
    # (4/π)^{r2} n!/n^n √|d| = 4/π
    assert abs(minkowski_bound(field_from_string("x^2+1")) - 4 / 3.141592653589793) < 1e-9


def test_bundled_cubic_field():
    K = load_field("x^3+x^2-2x-1")
    assert K.degree == 3
    assert K.discriminant == 49
    assert K.signature == (3, 0)
    assert K.class_number == 1
    theta, theta1 = K.units.fundamental
    assert theta.norm() == 1
    assert theta1.norm() == -1
    assert K.theta.power_coeffs() == (Fraction(0), Fraction(1), Fraction(0))


def test_norm_trace_and_embeddings():
    K = field_from_string("x^2-3")
    assert norm_trace(K.parse_element("2+t")) == (1, 4)
    lo, hi = embeddings(K, K.theta)
    assert abs(lo + 3 ** 0.5) < 1e-9 and abs(hi - 3 ** 0.5) < 1e-9


def test_unit_image_mod():
    Q = field_from_string("x")
    im = unit_image_mod(parse_ideal(Q, "5"))
    # (ℤ/5)^× × {±1} に -1 が (4, -) として入る
    assert (im.target_order, im.image_order, im.index) == (8, 2, 4)
    QI = field_from_string("x^2+1")
    im = unit_image_mod(parse_ideal(QI, "3"))
    assert (im.target_order, im.image_order, im.index) == (8, 4, 2)


QUADRATIC = [field_from_string(p) for p in ("x^2+1", "x^2+5", "x^2-3")]
nonzero_coords = st.tuples(st.integers(-30, 30), st.integers(-30, 30)).filter(lambda c: c != (0, 0))


@settings(max_examples=60, derandomize=True)
@given(st.sampled_from(QUADRATIC), nonzero_coords, nonzero_coords)
def test_element_norm_is_multiplicative(K, u, v):
    x, y = K.element(u), K.element(v)
    assert (x * y).norm() == x.norm() * y.norm()
    assert is_totally_positive(x * x)
    assert x.norm() != 0


def _solves_pell(D, y):
    for s in (1, -1):
        x2 = D * y * y + s
        if x2 >= 0 and isqrt(x2) ** 2 == x2:
            return True
    return False


@pytest.mark.parametrize("D", [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 19, 21, 22, 29, 31])
def test_pell_unit_is_minimal(D):
    x, y = pell_unit(D)
    assert x > 0 and y > 0
    assert x * x - D * y * y in (1, -1)
    assert not any(_solves_pell(D, q) for q in range(1, y))


def test_real_fundamental_unit_is_smallest():
    K = field_from_string("x^2-3")
    (eps,) = K.units.fundamental
    # ±(2 ± √3)
    assert sorted(abs(c) for c in eps.power_coeffs()) == [1, 2]
