import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bcwitt.cyclotomic import CyclotomicRing
from bcwitt.errors import MathInputError, VerificationError
from bcwitt.ideal_arith import principal
from bcwitt.number_field import field_from_string
from bcwitt.witt import (
    QQ,
    GhostVector,
    TruncationSet,
    dwork_member,
    frobenius,
    frobenius_commute,
    frobenius_congruence,
    ghost,
    ghost_vector,
    is_periodic,
    periodic_inclusion_check,
    periodic_rank,
    random_witt,
    restrict,
    ring_from_name,
    scalar_mul,
    teichmuller,
    unghost,
    verschiebung,
    witt_add,
    witt_mul,
    witt_sub,
    witt_vector,
)

S12 = TruncationSet.divisors(12)
small_ints = st.integers(-6, 6)


def test_ghost_two_components():
    x = witt_vector([1, 2], [3, 5])
    assert ghost(x).comps == (3, 3 * 3 + 2 * 5)


@settings(max_examples=50, derandomize=True)
@given(st.lists(small_ints, min_size=6, max_size=6))
def test_unghost_inverts_ghost(coords):
    x = witt_vector(S12, coords)
    assert unghost(ghost(x)) == x


@settings(max_examples=30, derandomize=True)
@given(st.lists(small_ints, min_size=6, max_size=6), st.lists(small_ints, min_size=6, max_size=6))
def test_ring_operations_stay_integral(a, b):
    x, y = witt_vector(S12, a), witt_vector(S12, b)
    assert witt_sub(witt_add(x, y), y) == x
    gx, gy, gxy = ghost(x), ghost(y), ghost(witt_mul(x, y))
    assert gxy.comps == tuple(u * v for u, v in zip(gx.comps, gy.comps))


def test_unghost_rejects_non_image():
    with pytest.raises(MathInputError):
        unghost(ghost_vector([1, 2], [1, 2]))
    # ℚ 上なら逆像がある
    x = unghost(ghost_vector([1, 2], [1, 2], QQ))
    assert x[2] == Fraction(1, 2)


def test_dwork_membership():
    assert dwork_member(ghost_vector([1, 2], [1, 3]))
    assert not dwork_member(ghost_vector([1, 2], [1, 2]))
    R = CyclotomicRing(5)
    x = random_witt(TruncationSet.divisors(4), random.Random(1), R)
    assert dwork_member(ghost(x))


def test_teichmuller_ghost():
    assert ghost(teichmuller(3, [1, 2, 4])).comps == (3, 9, 81)


def test_frobenius_and_verschiebung():
    x = witt_vector([1, 2], [2, 1])
    vx = verschiebung(2, x)
    assert vx.S.elements == (1, 2, 4)
    gx = ghost(x)
    assert ghost(vx).comps == (0, 2 * gx[1], 2 * gx[2])
    # F_m V_m = m
    assert frobenius(2, vx) == scalar_mul(2, x)
    y = witt_vector(TruncationSet.divisors(4), [1, 2, 3])
    assert ghost(frobenius(2, y)).comps == (ghost(y)[2], ghost(y)[4])


def test_frobenius_congruence_and_commutation():
    rng = random.Random(5)
    for _ in range(5):
        x = random_witt(S12, rng)
        assert frobenius_congruence(x, 2)
        assert frobenius_congruence(x, 3)
        assert frobenius_commute(x, 2, 3)


def test_periodicity():
    S = TruncationSet.divisors(4)
    r = is_periodic(teichmuller(2, S), 2)
    assert not r
    assert r.failure == (2, 4, 1)
    ok = is_periodic(teichmuller(-1, S), 2)
    assert ok and ok.pairs_checked == 1
    # 1 の原始 N 乗根の Teichmüller 持ち上げは N-周期的
    R = CyclotomicRing(3)
    assert is_periodic(teichmuller(R.zeta, TruncationSet.divisors(6), R), 3)


def test_periodic_rank_rational():
    Q = field_from_string("x")
    cert = periodic_rank(principal(Q.from_int(6)))
    assert cert.rank == cert.dr_size == cert.observed_classes == 6
    assert len(cert.terms) == 4
    assert cert.to_dict()["observed_classes"] == 6


def test_periodic_rank_counts_classes_directly():
    K = field_from_string("x^2+5")
    f = principal(K.from_int(3))
    cert = periodic_rank(f)
    assert cert.rank == cert.observed_classes == 10
    assert periodic_rank(f, "a").observed_classes == 10
    # ノルム 1 のイデアルだけでは類が 1 つしか見えない
    with pytest.raises(VerificationError):
        periodic_rank(f, norm_bound=1)


def test_truncation_set_must_be_divisor_closed():
    with pytest.raises(MathInputError):
        TruncationSet((1, 4))
    assert TruncationSet.closure([6]).elements == (1, 2, 3, 6)
    with pytest.raises(MathInputError):
        restrict(witt_vector([1, 2], [1, 1]), [1, 3])


def test_ring_names():
    assert ring_from_name("Z[zeta_5]") == CyclotomicRing(5)
    assert ring_from_name("zeta7") == CyclotomicRing(7)
    with pytest.raises(MathInputError):
        ring_from_name("GF(2)")


def test_periodic_inclusion():
    S = TruncationSet.divisors(12)
    R = CyclotomicRing(2)
    x = teichmuller(R.from_int(-1), S, R)
    assert periodic_inclusion_check(x, 2, 4)
    assert periodic_inclusion_check(x, 2, 6)
    with pytest.raises(MathInputError):
        periodic_inclusion_check(x, 4, 6)


@pytest.mark.parametrize("n", [2, 4, 3, 9])
def test_dwork_rejects_single_bump_over_divisors_of_36(n):
    S = TruncationSet.divisors(36)
    w = ghost(random_witt(S, random.Random(n)))
    assert dwork_member(w)
    bumped = GhostVector(w.ring, S, tuple(v + (1 if k == n else 0) for k, v in zip(S.elements, w.comps)))
    assert not dwork_member(bumped)
