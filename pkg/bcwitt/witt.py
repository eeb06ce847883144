"""大 Witt ベクトル (有限の約数閉集合 S で切断) と周期的 Witt ベクトル。

- ghost 写像 w_n = Σ_{d|n} d·x_d^{n/d} とその逆 (n による厳密な割り算)
- 環演算は ghost 成分ごとの演算を unghost して得る
- Frobenius F_m, Verschiebung V_m, Teichmüller [r]
- Dwork の合同式 w_{pn} ≡ ψ_p(w_n) mod p^{v_p(pn)} による像の判定
- N-周期性: DR_(N)(ℚ) で同じ類の a, b について F_a(x) = F_b(x)
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Optional, Sequence, Tuple, Union
import logging
import random

import sympy

from .cyclotomic import CyclotomicRing, cyclotomic_frobenius_check
from .errors import MathInputError, VerificationError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# 係数環
# ---------------------------------------------------------------------------

class IntegerRing:
    """ℤ (値は Fraction で持ち、整数性を検査する)。ψ_p は恒等写像。"""

    name = "ZZ"
    integral = True

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def coerce(self, v) -> Fraction:
        return Fraction(v)

    def is_integral(self, v) -> bool:
        return Fraction(v).denominator == 1

    def divisible(self, v, q: int) -> bool:
        return (Fraction(v) / q).denominator == 1

    def frobenius(self, p: int, v):
        return v

    def has_lift(self, p: int) -> bool:
        return True

    def to_json(self, v) -> str:
        return str(v)

    def random_element(self, rng: random.Random, lo: int = -5, hi: int = 5) -> Fraction:
        return Fraction(rng.randint(lo, hi))

    def __eq__(self, other) -> bool:
        return type(other) is type(self)

    def __hash__(self) -> int:
        return hash(self.name)


class RationalRing(IntegerRing):
    """ℚ: unghost で整数性を要求しない。"""

    name = "QQ"
    integral = False


ZZ = IntegerRing()
QQ = RationalRing()

Ring = Union[IntegerRing, CyclotomicRing]


def ring_from_name(name: str) -> Ring:
    """`ZZ`, `QQ`, `Z[zeta_5]` (または `zeta5`)。"""
    key = name.strip().replace(" ", "")
    if key.upper() in ("ZZ", "Z"):
        return ZZ
    if key.upper() in ("QQ", "Q"):
        return QQ
    for prefix in ("Z[zeta_", "zeta_", "zeta"):
        if key.startswith(prefix):
            try:
                return CyclotomicRing(int(key[len(prefix):].rstrip("]")))
            except ValueError:
                break
    raise MathInputError(f"unknown coefficient ring {name!r}")


# ---------------------------------------------------------------------------
# 切断集合
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncationSet:
    elements: Tuple[int, ...]

    def __post_init__(self):
        els = tuple(sorted(set(int(n) for n in self.elements)))
        if not els or els[0] < 1:
            raise MathInputError("truncation set must be a nonempty set of positive integers")
        present = set(els)
        for n in els:
            for d in sympy.divisors(n):
                if d not in present:
                    raise MathInputError(f"truncation set is not divisor-closed: {d} | {n} missing")
        object.__setattr__(self, "elements", els)

    @classmethod
    def divisors(cls, n: int) -> "TruncationSet":
        return cls(tuple(int(d) for d in sympy.divisors(n)))

    @classmethod
    def closure(cls, ns: Iterable[int]) -> "TruncationSet":
        out = set()
        for n in ns:
            out.update(int(d) for d in sympy.divisors(n))
        return cls(tuple(out))

    def __contains__(self, n: int) -> bool:
        return n in self.elements

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def divided(self, m: int) -> Tuple[int, ...]:
        """{n : mn ∈ S}。"""
        return tuple(n // m for n in self.elements if n % m == 0)

    def index(self, n: int) -> int:
        return self.elements.index(n)


def _truncation(S: Union[TruncationSet, Iterable[int]]) -> TruncationSet:
    return S if isinstance(S, TruncationSet) else TruncationSet(tuple(S))


# ---------------------------------------------------------------------------
# ベクトル
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GhostVector:
    ring: Ring
    S: TruncationSet
    comps: Tuple

    def __getitem__(self, n: int):
        return self.comps[self.S.index(n)]

    def as_dict(self) -> Dict[int, object]:
        return dict(zip(self.S.elements, self.comps))

    def to_dict(self) -> Dict:
        return {"S": list(self.S.elements), "w": {str(n): self.ring.to_json(v) for n, v in zip(self.S.elements, self.comps)}}


@dataclass(frozen=True)
class WittVector:
    ring: Ring
    S: TruncationSet
    coords: Tuple

    def __getitem__(self, n: int):
        return self.coords[self.S.index(n)]

    def as_dict(self) -> Dict[int, object]:
        return dict(zip(self.S.elements, self.coords))

    def to_dict(self) -> Dict:
        return {"S": list(self.S.elements), "x": {str(n): self.ring.to_json(v) for n, v in zip(self.S.elements, self.coords)}}

    def __add__(self, other: "WittVector") -> "WittVector":
        return witt_add(self, other)

    def __mul__(self, other: "WittVector") -> "WittVector":
        return witt_mul(self, other)

    def __neg__(self) -> "WittVector":
        return witt_neg(self)

    def __sub__(self, other: "WittVector") -> "WittVector":
        return witt_sub(self, other)


def witt_vector(S, coords: Union[Sequence, Dict[int, object]], ring: Ring = ZZ) -> WittVector:
    S = _truncation(S)
    if isinstance(coords, dict):
        values = [ring.coerce(coords.get(n, 0)) for n in S]
    else:
        if len(coords) != len(S):
            raise MathInputError(f"expected {len(S)} coordinates, got {len(coords)}")
        values = [ring.coerce(v) for v in coords]
    return WittVector(ring, S, tuple(values))


def ghost_vector(S, comps: Union[Sequence, Dict[int, object]], ring: Ring = ZZ) -> GhostVector:
    S = _truncation(S)
    if isinstance(comps, dict):
        values = [ring.coerce(comps[n]) for n in S]
    else:
        if len(comps) != len(S):
            raise MathInputError(f"expected {len(S)} ghost components, got {len(comps)}")
        values = [ring.coerce(v) for v in comps]
    return GhostVector(ring, S, tuple(values))


def ghost(x: WittVector) -> GhostVector:
    """w_n = Σ_{d|n} d·x_d^{n/d}。"""
    xs = x.as_dict()
    comps = []
    for n in x.S:
        acc = x.ring.zero
        for d in sympy.divisors(n):
            acc = acc + xs[d] ** (n // d) * int(d)
        comps.append(acc)
    return GhostVector(x.ring, x.S, tuple(comps))


def unghost(w: GhostVector, check_integral: Optional[bool] = None) -> WittVector:
    """ghost の逆。整数環上で座標が整数にならなければ MathInputError。"""
    check = w.ring.integral if check_integral is None else check_integral
    xs: Dict[int, object] = {}
    for n, wn in zip(w.S.elements, w.comps):
        acc = wn
        for d in sympy.divisors(n)[:-1]:
            acc = acc - xs[d] ** (n // d) * int(d)
        xn = acc / n
        if check and not w.ring.is_integral(xn):
            raise MathInputError(f"ghost vector is not in the Witt image: x_{n} = {xn} is not integral")
        xs[n] = xn
    return WittVector(w.ring, w.S, tuple(xs[n] for n in w.S))


# ---------------------------------------------------------------------------
# 環演算
# ---------------------------------------------------------------------------

def _check_compatible(x, y) -> None:
    if x.S != y.S:
        raise MathInputError(f"truncation sets differ: {x.S.elements} vs {y.S.elements}")
    if x.ring != y.ring:
        raise MathInputError("coefficient rings differ")


def _ghostwise(x: WittVector, y: WittVector, op: Callable) -> WittVector:
    _check_compatible(x, y)
    gx, gy = ghost(x), ghost(y)
    w = GhostVector(x.ring, x.S, tuple(op(a, b) for a, b in zip(gx.comps, gy.comps)))
    try:
        return unghost(w)
    except MathInputError as e:
        raise VerificationError(f"Witt operation left the integral image: {e}") from e


def witt_add(x: WittVector, y: WittVector) -> WittVector:
    return _ghostwise(x, y, lambda a, b: a + b)


def witt_mul(x: WittVector, y: WittVector) -> WittVector:
    return _ghostwise(x, y, lambda a, b: a * b)


def witt_neg(x: WittVector) -> WittVector:
    return unghost(GhostVector(x.ring, x.S, tuple(-a for a in ghost(x).comps)))


def witt_sub(x: WittVector, y: WittVector) -> WittVector:
    return _ghostwise(x, y, lambda a, b: a - b)


def witt_pow(x: WittVector, k: int) -> WittVector:
    result = witt_one(x.S, x.ring)
    for _ in range(k):
        result = witt_mul(result, x)
    return result


def scalar_mul(k: int, x: WittVector) -> WittVector:
    """k·x (環の元 k·1 との積)。"""
    return unghost(GhostVector(x.ring, x.S, tuple(a * k for a in ghost(x).comps)))


def witt_zero(S, ring: Ring = ZZ) -> WittVector:
    S = _truncation(S)
    return WittVector(ring, S, tuple(ring.zero for _ in S))


def witt_one(S, ring: Ring = ZZ) -> WittVector:
    return teichmuller(ring.one, S, ring)


def constant(c, S, ring: Ring = ZZ) -> WittVector:
    """ghost 成分がすべて c の Witt ベクトル (c·1)。"""
    return scalar_mul(int(c), witt_one(S, ring))


def teichmuller(r, S, ring: Ring = ZZ) -> WittVector:
    """[r]: 座標 (r, 0, 0, ...), ghost は r^n。"""
    S = _truncation(S)
    r = ring.coerce(r)
    return WittVector(ring, S, tuple(r if n == 1 else ring.zero for n in S))


def restrict(x: WittVector, T) -> WittVector:
    T = _truncation(T)
    if any(n not in x.S for n in T):
        raise MathInputError(f"{T.elements} is not contained in {x.S.elements}")
    return WittVector(x.ring, T, tuple(x[n] for n in T))


def frobenius(m: int, x: WittVector) -> WittVector:
    """F_m: (F_m w)_n = w_{mn}, 出力の切断は S/m。"""
    if m < 1:
        raise MathInputError("Frobenius index must be positive")
    out = x.S.divided(m)
    if not out:
        raise MathInputError(f"F_{m} has empty output truncation on {x.S.elements}")
    g = ghost(x)
    w = GhostVector(x.ring, TruncationSet(out), tuple(g[m * n] for n in out))
    return unghost(w)


def verschiebung(m: int, x: WittVector) -> WittVector:
    """V_m: 座標 (V_m x)_{mn} = x_n, 他は 0。出力の切断は m·S の約数閉包。"""
    if m < 1:
        raise MathInputError("Verschiebung index must be positive")
    T = TruncationSet.closure(m * n for n in x.S)
    coords = tuple(x[n // m] if n % m == 0 else x.ring.zero for n in T)
    return WittVector(x.ring, T, coords)


# ---------------------------------------------------------------------------
# Dwork の判定
# ---------------------------------------------------------------------------

def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def dwork_member(w: GhostVector, skip_unliftable: bool = False) -> bool:
    """w が整 Witt ベクトルの ghost 像か (w_{pn} ≡ ψ_p(w_n) mod p^{v_p(pn)})。"""
    ring = w.ring
    if ring.integral and not all(ring.is_integral(v) for v in w.comps):
        return False
    primes = sorted({int(p) for n in w.S for p in sympy.primefactors(n)})
    for p in primes:
        if not ring.has_lift(p):
            if skip_unliftable:
                continue
            raise MathInputError(f"no Frobenius lift at p={p} on {ring.name}")
        for n in w.S.divided(p):
            q = p ** _vp(p * n, p)
            if not ring.divisible(w[p * n] - ring.frobenius(p, w[n]), q):
                return False
    return True


def frobenius_congruence(x: WittVector, p: int) -> bool:
    """F_p(x) ≡ x^p (mod p·W) を S/p 上で確かめる。"""
    fx = frobenius(p, x)
    xp = restrict(witt_pow(x, p), fx.S)
    diff = ghost(witt_sub(fx, xp))
    try:
        unghost(GhostVector(x.ring, diff.S, tuple(a / p for a in diff.comps)), check_integral=True)
    except MathInputError:
        return False
    return True


def frobenius_commute(x: WittVector, p: int, q: int) -> bool:
    """F_p ∘ F_q = F_q ∘ F_p (= F_pq)。"""
    pq = frobenius(p, frobenius(q, x))
    return pq == frobenius(q, frobenius(p, x)) == frobenius(p * q, x)


# ---------------------------------------------------------------------------
# 周期性
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicityResult:
    periodic: bool
    vacuous: bool
    pairs_checked: int
    failure: Optional[Tuple[int, int, int]] = None

    def __bool__(self) -> bool:
        return self.periodic

    def to_dict(self) -> Dict:
        return {
            "periodic": self.periodic,
            "vacuous": self.vacuous,
            "pairs_checked": self.pairs_checked,
            "failure": list(self.failure) if self.failure else None,
        }


def rational_dr_classifier(N: int) -> Callable[[int], Hashable]:
    """a ↦ (a) の DR_(N)(ℚ) での類の添字。"""
    from .dr_monoid import build_dr
    from .ideal_arith import principal
    from .number_field import field_from_string

    Q = field_from_string("x")
    D = build_dr(principal(Q.from_int(N)), "b")
    cache: Dict[int, int] = {}

    def classify(a: int) -> int:
        if a not in cache:
            cache[a] = D.classify(principal(Q.from_int(a)))
        return cache[a]

    return classify


def is_periodic(x: WittVector, N: int, classify: Optional[Callable[[int], Hashable]] = None) -> PeriodicityResult:
    """DR_(N)(ℚ) で [a] = [b] となる a ≠ b ∈ S すべてで F_a(x) = F_b(x) か。"""
    classify = classify or rational_dr_classifier(N)
    g = ghost(x).as_dict()
    S = list(x.S)
    pairs = 0
    for i, a in enumerate(S):
        for b in S[i + 1:]:
            if classify(a) != classify(b):
                continue
            pairs += 1
            common = set(x.S.divided(a)) & set(x.S.divided(b))
            for n in sorted(common):
                if g[a * n] != g[b * n]:
                    return PeriodicityResult(False, False, pairs, (a, b, n))
    return PeriodicityResult(True, pairs == 0, pairs)


def periodic_inclusion_check(x: WittVector, N: int, M: int) -> bool:
    """N | M のとき N-周期的なら M-周期的 (W^(N) ⊂ W^(M))。"""
    if M % N:
        raise MathInputError(f"{N} does not divide {M}")
    if not is_periodic(x, N):
        return True
    return bool(is_periodic(x, M))


@dataclass(frozen=True)
class RankCertificate:
    modulus: object
    rank: int
    dr_size: int
    terms: Tuple[Tuple[object, int], ...]
    observed_classes: int
    norm_bound: int

    def to_dict(self) -> Dict:
        return {
            "modulus": self.modulus.to_dict(),
            "rank": self.rank,
            "dr_size": self.dr_size,
            "observed_classes": self.observed_classes,
            "norm_bound": self.norm_bound,
            "terms": [{"conductor": d.to_dict(), "h_plus": h} for d, h in self.terms],
        }


def periodic_rank(f, construction: str = "b", norm_bound: Optional[int] = None) -> RankCertificate:
    """Σ_{d|f} [K_d : K] = Σ_{d|f} |Cl^+_d| を求め、|DR_f| と一致することを確かめる。

    |DR_f| は構成 (既定は B) の元の数と、ノルム ≤ norm_bound のイデアルを ∼_f で
    直接分けた類の数の両方で数える。norm_bound の既定は構成の代表元のノルムの最大値。
    """
    from .dr_monoid import build_dr, dr_partition
    from .ideal_arith import divisors_of
    from .ray_class import ray_class_group

    terms = tuple((d, ray_class_group(d).order) for d in divisors_of(f))
    rank = sum(h for _d, h in terms)
    D = build_dr(f, construction)
    bound = norm_bound or max(int(e.representative.norm()) for e in D.elements)
    observed = len(dr_partition(f, bound))
    if not rank == D.size == observed:
        raise VerificationError(
            f"periodic rank {rank}, |DR_f| = {D.size} (construction {D.construction}), "
            f"{observed} classes among ideals of norm <= {bound} for f = {f}"
        )
    return RankCertificate(f, rank, D.size, terms, observed, bound)


# ---------------------------------------------------------------------------
# 乱数生成 (性質テスト用)
# ---------------------------------------------------------------------------

def random_witt(S, rng: random.Random, ring: Ring = ZZ, lo: int = -5, hi: int = 5) -> WittVector:
    S = _truncation(S)
    return WittVector(ring, S, tuple(ring.random_element(rng, lo, hi) for _ in S))


def random_periodic(S, N: int, rng: random.Random) -> WittVector:
    """ℤ[ζ_N] 上で 1 の N 乗根の Teichmüller 持ち上げと定数から作る N-周期的ベクトル。"""
    ring = CyclotomicRing(N)
    S = _truncation(S)
    x = constant(rng.randint(-3, 3), S, ring)
    for _ in range(2):
        t = teichmuller(ring.zeta_power(rng.randrange(N)), S, ring)
        x = witt_add(x, t) if rng.random() < 0.5 else witt_mul(x, witt_add(t, constant(rng.randint(-2, 2), S, ring)))
    return x


__all__ = [
    "IntegerRing",
    "RationalRing",
    "ZZ",
    "QQ",
    "ring_from_name",
    "TruncationSet",
    "GhostVector",
    "WittVector",
    "witt_vector",
    "ghost_vector",
    "ghost",
    "unghost",
    "witt_add",
    "witt_mul",
    "witt_neg",
    "witt_sub",
    "witt_pow",
    "scalar_mul",
    "witt_zero",
    "witt_one",
    "constant",
    "teichmuller",
    "restrict",
    "frobenius",
    "verschiebung",
    "dwork_member",
    "frobenius_congruence",
    "frobenius_commute",
    "PeriodicityResult",
    "rational_dr_classifier",
    "is_periodic",
    "periodic_inclusion_check",
    "RankCertificate",
    "periodic_rank",
    "cyclotomic_frobenius_check",
    "random_witt",
    "random_periodic",
]
