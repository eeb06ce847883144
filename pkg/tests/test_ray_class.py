import dataclasses

import pytest
import sympy

from bcwitt.errors import MathInputError
from bcwitt.ideal_arith import parse_ideal, principal, unit_ideal
from bcwitt.number_field import field_from_string
from bcwitt.ray_class import (
    congruent_generator,
    find_generator,
    ray_class_group,
    ray_class_number,
    ray_equivalent,
    residue_units,
)

Q = field_from_string("x")
QI = field_from_string("x^2+1")
Q5 = field_from_string("x^2+5")
Q3 = field_from_string("x^2-3")


def ideal(K, text):
    return parse_ideal(K, text)


@pytest.mark.parametrize(
    "K, gens, strict, order",
    [
        (Q, "1", True, 1),
        (Q, "5", True, 4),
        (Q, "5", False, 2),
        (Q, "8", True, 4),
        (QI, "1", True, 1),
        (QI, "3", True, 2),
        (QI, "2+t", True, 1),
        (Q5, "1", True, 2),
        (Q5, "2", True, 4),
        (Q5, "3", True, 4),
        (Q3, "1", True, 2),
        (Q3, "1", False, 1),
        (Q3, "2", True, 2),
    ],
)
def test_orders_match_formula(K, gens, strict, order):
    f = ideal(K, gens)
    G = ray_class_group(f, strict=strict)
    assert G.order == order
    assert ray_class_number(f, strict) == order
    assert len(G.representatives) == order


def test_rational_ray_class_is_residue_units():
    G = ray_class_group(ideal(Q, "8"))
    assert G.group.invariants == (2, 2)
    G5 = ray_class_group(ideal(Q, "5"))
    assert G5.group.invariants == (4,)
    assert G5.class_of(principal(Q.from_int(2))) == G5.class_of(principal(Q.from_int(7)))
    assert G5.class_of(principal(Q.from_int(2))) != G5.class_of(principal(Q.from_int(3)))


def test_class_of_requires_coprime():
    G = ray_class_group(ideal(Q, "6"))
    with pytest.raises(MathInputError):
        G.class_of(principal(Q.from_int(4)))


def test_ray_equivalence_signs():
    five = ideal(Q, "5")
    two, seven = principal(Q.from_int(2)), principal(Q.from_int(7))
    four, one = principal(Q.from_int(4)), unit_ideal(Q)
    assert ray_equivalent(two, seven, five)
    assert not ray_equivalent(four, one, five, strict=True)
    assert ray_equivalent(four, one, five, strict=False)


def test_residue_units():
    assert residue_units(ideal(Q, "8")).group.invariants == (2, 2)
    ru = residue_units(ideal(QI, "3"))
    assert ru.group.invariants == (8,)
    with pytest.raises(MathInputError):
        ru.dlog((0, 0))


def test_generator_search():
    assert find_generator(ideal(Q5, "2, 1+t")) is None
    x = find_generator(ideal(Q5, "1+t"))
    assert abs(x.norm()) == 6
    # 2+√3 は単数
    assert ideal(Q3, "2+t") == unit_ideal(Q3)
    g = congruent_generator(unit_ideal(Q3), ideal(Q3, "2"))
    assert g is not None and g.is_totally_positive()


def test_artin_table_and_dict():
    G = ray_class_group(ideal(QI, "3"))
    table = G.artin_table()
    assert len(table) == len(G.generators)
    d = G.to_dict()
    assert d["order"] == 2
    assert d["invariant_factors"] == [2]


def test_coprime_to_avoids_primes():
    G = ray_class_group(unit_ideal(Q5), coprime_to=ideal(Q5, "6"))
    for P in G.generators:
        assert P.p not in (2, 3)


@pytest.mark.parametrize("n", range(1, 31))
def test_rational_strict_ray_class_is_residue_units(n):
    G = ray_class_group(principal(Q.from_int(n)))
    assert G.order == sympy.totient(n)
    assert G.group.exponent == sympy.reduced_totient(n)
    seen = {}
    for m in range(1, 3 * n + 1):
        if sympy.gcd(m, n) != 1:
            continue
        c = G.class_of(principal(Q.from_int(m)))
        assert seen.setdefault(m % n, c) == c
    assert len(set(seen.values())) == len(seen) == G.order


@pytest.mark.parametrize("K", [QI, Q5], ids=["gaussian", "sqrt-5"])
@pytest.mark.parametrize("gens", ["1", "2", "3", "5", "6", "2+t"])
def test_imaginary_strict_equals_ordinary(K, gens):
    f = ideal(K, gens)
    strict, ordinary = ray_class_group(f, strict=True), ray_class_group(f, strict=False)
    assert strict.order == ordinary.order == ray_class_number(f, False)
    assert strict.group.invariants == ordinary.group.invariants


def test_class_lookup_leaves_shared_group_unchanged():
    G = ray_class_group(ideal(Q, "7"))
    assert G is ray_class_group(ideal(Q, "7"))
    before = dict(G.prime_classes)
    assert len(before) == len(G.generators)
    # 101 ≡ 3 mod 7 は生成元の素数ではない
    assert G.class_of(principal(Q.from_int(101))) == G.class_of(principal(Q.from_int(3)))
    assert dict(G.prime_classes) == before
    with pytest.raises(dataclasses.FrozenInstanceError):
        G.strict = False
    with pytest.raises(TypeError):
        G.prime_classes[principal(Q.from_int(101))] = G.group.identity
