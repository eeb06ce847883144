import random

import pytest

from bcwitt.cyclotomic import CyclotomicRing, cyclotomic_frobenius_check, cyclotomic_polynomial, frobenius_defect
from bcwitt.errors import MathInputError


@pytest.mark.parametrize(
    "m, coeffs",
    [
        (1, (-1, 1)),
        (2, (1, 1)),
        (4, (1, 0, 1)),
        (6, (1, -1, 1)),
        (12, (1, 0, -1, 0, 1)),
    ],
)
def test_cyclotomic_polynomials(m, coeffs):
    assert cyclotomic_polynomial(m).coeffs == coeffs


def test_zeta_relations():
    R = CyclotomicRing(4)
    assert R.zeta ** 4 == R.one
    assert R.zeta ** 2 == R.from_int(-1)
    assert R.zeta_power(7) == R.zeta_power(3)
    R6 = CyclotomicRing(6)
    assert R6.degree == 2
    # ζ_6^3 = -1
    assert R6.zeta ** 3 == R6.from_int(-1)


def test_frobenius_lift():
    R = CyclotomicRing(6)
    assert R.frobenius(5, R.zeta) == R.zeta_power(5)
    assert R.frobenius(5, R.one) == R.one
    with pytest.raises(MathInputError):
        R.frobenius(2, R.zeta)


def test_frobenius_defect_divisible():
    R = CyclotomicRing(5)
    rng = random.Random(3)
    for _ in range(10):
        x = R.random_element(rng)
        assert R.divisible(frobenius_defect(R, 2, x), 2)


def test_frobenius_check():
    assert cyclotomic_frobenius_check(5, 2)
    assert cyclotomic_frobenius_check(12, 7, trials=5)
    with pytest.raises(MathInputError):
        cyclotomic_frobenius_check(4, 2)
    with pytest.raises(MathInputError):
        cyclotomic_frobenius_check(5, 4)


def test_rational_coefficients():
    R = CyclotomicRing(3)
    half = R.zeta / 2
    assert not half.is_integral()
    assert (half * 2) == R.zeta
    with pytest.raises(MathInputError):
        R.zeta ** -1
