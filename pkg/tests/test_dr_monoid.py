import pytest
import sympy
from hypothesis import given, settings, strategies as st

from bcwitt.dr_monoid import (
    act,
    build_dr,
    dr_equivalent,
    dr_fiber_product,
    dr_partition,
    dr_project,
    dr_quotient,
    dr_size,
    dr_structural,
    idempotents,
)
from bcwitt.errors import MathInputError
from bcwitt.ideal_arith import enumerate_ideals, ideal_inverse, parse_ideal, prime_divisors, principal
from bcwitt.number_field import field_from_string

Q = field_from_string("x")


def modulus(poly, gens):
    return parse_ideal(field_from_string(poly), gens)


MATRIX = [
    ("x", "4", 4),
    ("x", "6", 6),
    ("x", "12", 12),
    ("x^2+1", "2", 3),
    ("x^2+1", "2+t", 2),
    ("x^2+1", "3", 3),
    ("x^2+5", "2", 8),
    ("x^2+5", "3", 10),
    ("x^2-3", "2", 6),
]


@pytest.mark.parametrize("poly, gens, size", MATRIX)
def test_sizes(poly, gens, size):
    assert dr_size(modulus(poly, gens)) == size


@pytest.mark.parametrize("poly, gens, size", MATRIX)
def test_three_constructions_agree(poly, gens, size):
    f = modulus(poly, gens)
    a = build_dr(f, "a")
    b = build_dr(f, "b")
    c = build_dr(f, "c")
    assert a.size == b.size == c.size == size
    phi = a.isomorphism_to(b)
    assert sorted(phi) == list(range(size))
    a.isomorphism_to(c)
    assert a.is_associative() and a.is_commutative() and a.is_unital()


def test_rational_dr_is_multiplicative_residues():
    D = dr_quotient(principal(Q.from_int(6)))
    residues = [int(e.representative.norm()) % 6 for e in D.elements]
    assert sorted(residues) == list(range(6))
    for i in range(6):
        for j in range(6):
            assert residues[D.table[i][j]] == residues[i] * residues[j] % 6


@settings(max_examples=40, derandomize=True)
@given(st.integers(1, 60), st.integers(1, 60))
def test_rational_classes_are_residues_mod_6(a, b):
    f = principal(Q.from_int(6))
    same = dr_equivalent(principal(Q.from_int(a)), principal(Q.from_int(b)), f)
    assert same == (a % 6 == b % 6)


def test_equivalence_is_symmetric():
    f = modulus("x^2+1", "2")
    a, b = parse_ideal(f.field, "1+t"), parse_ideal(f.field, "3+t")
    assert dr_equivalent(a, b, f) == dr_equivalent(b, a, f)


def test_idempotents():
    assert len(idempotents(build_dr(principal(Q.from_int(6)), "b"))) == 4
    assert len(idempotents(build_dr(principal(Q.from_int(12)), "b"))) == 4
    # 単位元は冪等
    D = build_dr(modulus("x^2+5", "2"), "b")
    assert D.identity in idempotents(D)


def test_projection_chain():
    small, mid, big = (build_dr(principal(Q.from_int(n)), "b") for n in (2, 6, 12))
    p1 = dr_project(mid, small)
    p2 = dr_project(big, mid)
    assert p1.compose(p2).mapping == dr_project(big, small).mapping
    assert set(p2.mapping) == set(range(mid.size))


def test_projection_needs_divisibility():
    a = build_dr(principal(Q.from_int(6)), "b")
    with pytest.raises(MathInputError):
        dr_project(a, principal(Q.from_int(4)))


def test_unknown_construction():
    with pytest.raises(MathInputError):
        build_dr(principal(Q.from_int(4)), "z")


def test_to_dict_shape():
    d = build_dr(modulus("x^2+1", "2"), "a").to_dict()
    assert d["size"] == 3
    assert len(d["table"]) == 3
    assert all(len(r) == 3 for r in d["table"])


def test_named_constructions():
    f = modulus("x^2+5", "2")
    A = dr_quotient(f)
    B = dr_structural(f, check_against=A)
    C = dr_fiber_product(f, check_against=A)
    assert A.size == B.size == C.size == 8
    assert C.convention in ("inverse", "direct")


def test_act_multiplies_classes():
    f = principal(Q.from_int(6))
    D = build_dr(f, "b")
    five = principal(Q.from_int(5))
    # 5·5 ≡ 1 mod 6
    assert act(D, five, D.classify(five)) == D.identity
    assert act(D, principal(Q.from_int(7)), 3) == 3


RELATION_CASES = [
    ("x", "4"),
    ("x", "6"),
    ("x", "12"),
    pytest.param("x^2+1", "2", marks=pytest.mark.slow),
    pytest.param("x^2+1", "2+t", marks=pytest.mark.slow),
]


@pytest.mark.parametrize("poly, gens", RELATION_CASES)
def test_relation_is_an_equivalence_up_to_norm_60(poly, gens):
    f = modulus(poly, gens)
    ideals = enumerate_ideals(f.field, 60)
    n = len(ideals)
    rel = [[dr_equivalent(ideals[i], ideals[j], f) for j in range(n)] for i in range(n)]
    assert all(rel[i][i] for i in range(n))
    assert all(rel[i][j] == rel[j][i] for i in range(n) for j in range(i))
    rows = [frozenset(j for j in range(n) if rel[i][j]) for i in range(n)]
    # 推移律: 同値な 2 つの行は同じ集合
    for i in range(n):
        for j in rows[i]:
            assert rows[j] == rows[i], (ideals[i], ideals[j])
    classes = set(rows)
    assert len(classes) == dr_size(f)
    assert {frozenset(c) for c in dr_partition(f, 60)} == {frozenset(ideals[j] for j in c) for c in classes}


def test_partition_ignores_the_order_formula():
    f = principal(Q.from_int(6))
    classes = dr_partition(f, 6)
    assert len(classes) == 6
    assert sorted(min(int(a.norm()) for a in c) for c in classes) == [1, 2, 3, 4, 5, 6]
    # ノルム 4 以下には 5 と 0 mod 6 の類がない
    assert len(dr_partition(f, 4)) == 4
    with pytest.raises(MathInputError):
        dr_partition(ideal_inverse(principal(Q.from_int(2))), 4)


@pytest.mark.parametrize(
    "n",
    [n if n <= 12 else pytest.param(n, marks=pytest.mark.slow) for n in range(1, 25)],
)
def test_rational_levels(n):
    f = principal(Q.from_int(n))
    A = dr_quotient(f)
    B = dr_structural(f, check_against=A)
    C = dr_fiber_product(f, check_against=A)
    assert A.size == B.size == C.size == n
    assert len(idempotents(B)) == 2 ** len(sympy.primefactors(n))


@pytest.mark.parametrize("poly, gens, size", MATRIX)
def test_idempotents_are_unitary_divisors(poly, gens, size):
    f = modulus(poly, gens)
    D = build_dr(f, "b")
    assert len(idempotents(D)) == 2 ** len(prime_divisors(f))


def test_identity_is_computed_once():
    D = build_dr(modulus("x^2+1", "2"), "b")
    calls = []
    classify = D.classifier

    def counting(a):
        calls.append(a)
        return classify(a)

    D.classifier = counting
    e = D.identity
    assert D.identity == e
    assert D.is_unital()
    assert len(calls) == 1
    assert vars(D)["identity"] == e
