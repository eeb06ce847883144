import pytest
from hypothesis import given, settings, strategies as st

from bcwitt.errors import MathInputError
from bcwitt.field_data import load_field
from bcwitt.ideal_arith import (
    are_coprime,
    divisors_of,
    enumerate_ideals,
    factor_ideal,
    ideal_contains,
    ideal_divides,
    ideal_from_generators,
    ideal_intersection,
    ideal_inverse,
    ideal_norm,
    ideal_product,
    ideal_quotient,
    ideal_sum,
    parse_ideal,
    primes_above,
    principal,
    product_of_factors,
    reduce_mod,
    residues,
    unit_ideal,
    unit_period,
)
from bcwitt.number_field import field_from_string

QI = field_from_string("x^2+1")
Q5 = field_from_string("x^2+5")
Q = field_from_string("x")


def test_norms():
    assert principal(QI.parse_element("1+t")).norm() == 2
    assert principal(QI.from_int(3)).norm() == 9
    assert parse_ideal(Q5, "2, 1+t").norm() == 2
    assert unit_ideal(QI).is_unit()


def test_zero_ideal_rejected():
    with pytest.raises(MathInputError):
        principal(QI.zero)


def test_splitting_in_gaussian_integers():
    (p2,) = primes_above(QI, 2)
    assert (p2.ramification, p2.residue_degree) == (2, 1)
    (p3,) = primes_above(QI, 3)
    assert (p3.ramification, p3.residue_degree) == (1, 2)
    p5 = primes_above(QI, 5)
    assert len(p5) == 2
    assert all(P.norm == 5 for P in p5)


def test_non_principal_prime_squares_to_two():
    P = parse_ideal(Q5, "2, 1+t")
    assert P * P == principal(Q5.from_int(2))
    assert [(f.ideal, e) for f, e in factor_ideal(principal(Q5.from_int(2)))] == [(P, 2)]


def test_factor_and_rebuild():
    for text in ("6", "10", "3+t", "21"):
        a = parse_ideal(Q5, text)
        assert product_of_factors(Q5, factor_ideal(a)) == a


def test_inverse_and_quotient():
    a = parse_ideal(Q5, "3, 1+t")
    assert a * ideal_inverse(a) == unit_ideal(Q5)
    b = principal(Q5.from_int(6))
    q = ideal_quotient(b, a)
    assert q * a == b
    assert q.is_integral()
    assert not ideal_inverse(a).is_integral()


def test_divisibility_and_coprimality():
    two = principal(QI.from_int(2))
    p = principal(QI.parse_element("1+t"))
    assert ideal_divides(p, two)
    assert not ideal_divides(two, p)
    assert are_coprime(p, principal(QI.from_int(3)))
    assert not are_coprime(p, two)
    assert ideal_sum(two, principal(QI.from_int(3))) == unit_ideal(QI)
    assert ideal_intersection(two, principal(QI.from_int(3))) == principal(QI.from_int(6))


def test_divisors():
    assert len(divisors_of(principal(Q.from_int(12)))) == 6
    assert len(divisors_of(principal(QI.from_int(2)))) == 3
    assert len(divisors_of(principal(Q5.from_int(6)))) == 12


def test_residues():
    f = principal(QI.from_int(3))
    rs = residues(f)
    assert len(rs) == 9
    assert reduce_mod((4, -1), f) == (1, 2)


def test_enumerate_ideals_counts():
    ideals = enumerate_ideals(QI, 10)
    assert len(ideals) == 9
    norms = [int(a.norm()) for a in ideals]
    assert norms == sorted(norms)
    assert len(enumerate_ideals(Q, 30)) == 30


def test_cubic_splitting():
    K = load_field("x^3+x^2-2x-1")
    (P7,) = primes_above(K, 7)
    assert P7.ramification == 3
    (P2,) = primes_above(K, 2)
    assert P2.residue_degree == 3
    assert len(primes_above(K, 13)) == 3


def test_generators_product_and_containment():
    P = ideal_from_generators(Q5, [Q5.from_int(2), Q5.parse_element("1+t")])
    assert P == parse_ideal(Q5, "2, 1+t")
    assert ideal_norm(P) == 2
    assert ideal_product(P, P) == P * P
    assert ideal_contains(P, Q5.parse_element("1+t"))
    assert not ideal_contains(P, Q5.one)


def test_unit_period_signs():
    five, two = principal(Q.from_int(5)), principal(Q.from_int(2))
    minus = Q.from_int(-1)
    assert unit_period(five, minus) == 2
    # -1 ≡ 1 mod 2 なので符号を見なければ位数 1
    assert unit_period(two, minus, strict=False) == 1
    assert unit_period(two, minus) == 2


Q3 = field_from_string("x^2-3")
QUADRATIC = [QI, Q5, Q3]
QUADRATIC_IDS = ["gaussian", "sqrt-5", "sqrt3"]


@pytest.mark.slow
@pytest.mark.parametrize("K", QUADRATIC, ids=QUADRATIC_IDS)
def test_factorization_round_trip_up_to_norm_200(K):
    for a in enumerate_ideals(K, 200):
        factors = factor_ideal(a)
        assert product_of_factors(K, factors) == a
        assert all(e >= 1 for _P, e in factors)
        assert a * ideal_inverse(a) == unit_ideal(K)


@pytest.mark.parametrize("K", QUADRATIC, ids=QUADRATIC_IDS)
def test_enumeration_is_sorted_without_duplicates(K):
    ideals = enumerate_ideals(K, 200)
    assert len(set(ideals)) == len(ideals)
    keys = [a.sort_key() for a in ideals]
    assert keys == sorted(keys)
    assert all(a.is_integral() and a.norm() <= 200 for a in ideals)


@pytest.mark.parametrize("K", QUADRATIC, ids=QUADRATIC_IDS)
def test_ideal_norm_is_multiplicative(K):
    ideals = enumerate_ideals(K, 30)
    for a in ideals:
        for b in ideals:
            assert (a * b).norm() == a.norm() * b.norm()


@settings(max_examples=40, derandomize=True)
@given(st.sampled_from(QUADRATIC), st.integers(1, 60), st.integers(-20, 20), st.integers(1, 20))
def test_inverse_of_two_generated_ideal(K, n, a, b):
    I = ideal_from_generators(K, [K.from_int(n), K.element([a, b])])
    assert I * ideal_inverse(I) == unit_ideal(K)
    assert ideal_inverse(ideal_inverse(I)) == I
