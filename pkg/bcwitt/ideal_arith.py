"""分数イデアルと整イデアル (HNF 格子 + 分母)。

正規形: 分子は n×n の行型 HNF, 分母は正で全成分との gcd が 1。
したがって等価判定・ハッシュは成分比較だけで済む。
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd
from typing import Dict, Iterable, List, Sequence, Tuple
import itertools
import logging

import sympy
from sympy import Matrix, Poly, Symbol

from .core_arith import common_denominator, hnf, lattice_coordinates, prime_factors, rational_inverse
from .errors import MathInputError, VerificationError
from .number_field import FieldElement, NumberField

logger = logging.getLogger(__name__)

Residue = Tuple[int, ...]

# True のとき ideal_inverse ごとに a·a^{-1} = (1) を検証する
DEBUG_CHECKS = False


def set_debug_checks(enabled: bool) -> None:
    global DEBUG_CHECKS
    DEBUG_CHECKS = bool(enabled)


@dataclass(frozen=True)
class FractionalIdeal:
    field: NumberField = dc_field(repr=False)
    hnf: Tuple[Tuple[int, ...], ...] = ()
    den: int = 1

    @property
    def degree(self) -> int:
        return self.field.degree

    def norm(self) -> Fraction:
        num = reduce(lambda x, i: x * self.hnf[i][i], range(len(self.hnf)), 1)
        return Fraction(num, self.den ** self.degree)

    def is_integral(self) -> bool:
        return self.den == 1

    def is_unit(self) -> bool:
        return self.den == 1 and all(self.hnf[i][i] == 1 for i in range(len(self.hnf)))

    def basis(self) -> List[FieldElement]:
        return [self.field.element(Fraction(c, self.den) for c in row) for row in self.hnf]

    def contains(self, x: FieldElement) -> bool:
        scaled = [c * self.den for c in x.coords]
        if any(c.denominator != 1 for c in scaled):
            return False
        return lattice_coordinates(self.hnf, [int(c) for c in scaled]) is not None

    def sort_key(self) -> Tuple:
        return (self.norm(), self.hnf, self.den)

    def to_dict(self) -> Dict:
        return {"hnf": [list(r) for r in self.hnf], "den": self.den, "norm": self.norm()}

    def __str__(self) -> str:
        rows = ";".join(",".join(str(c) for c in r) for r in self.hnf)
        return f"[{rows}]" if self.den == 1 else f"[{rows}]/{self.den}"

    # 演算子は関数版への薄い委譲
    def __mul__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        return ideal_product(self, other)

    def __add__(self, other: "FractionalIdeal") -> "FractionalIdeal":
        return ideal_sum(self, other)

    def __pow__(self, k: int) -> "FractionalIdeal":
        return ideal_power(self, k)


@dataclass(frozen=True)
class PrimeIdeal:
    p: int
    ideal: FractionalIdeal
    residue_degree: int
    ramification: int

    @property
    def norm(self) -> int:
        return self.p ** self.residue_degree

    def to_dict(self) -> Dict:
        d = self.ideal.to_dict()
        d.update({"p": self.p, "f": self.residue_degree, "e": self.ramification})
        return d


# ---------------------------------------------------------------------------
# 構築
# ---------------------------------------------------------------------------

def _int_mul(field: NumberField, u: Sequence[int], v: Sequence[int]) -> List[int]:
    n = field.degree
    out = [0] * n
    mult = field.mult
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                if b:
                    ab = a * b
                    for k, m in enumerate(mult[i][j]):
                        if m:
                            out[k] += ab * m
    return out


def _make(field: NumberField, rows: Iterable[Sequence[int]], den: int) -> FractionalIdeal:
    h = hnf(rows)
    if len(h) != field.degree:
        raise MathInputError("zero ideal")
    g = reduce(gcd, (c for r in h for c in r), den)
    h = tuple(tuple(c // g for c in r) for r in h)
    return FractionalIdeal(field, h, den // g)


def _from_fraction_rows(field: NumberField, rows: Sequence[Sequence[Fraction]]) -> FractionalIdeal:
    den = common_denominator(c for r in rows for c in r)
    return _make(field, ([int(c * den) for c in r] for r in rows), den)


def unit_ideal(field: NumberField) -> FractionalIdeal:
    n = field.degree
    return FractionalIdeal(field, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), 1)


def ideal_from_generators(field: NumberField, xs: Sequence[FieldElement]) -> FractionalIdeal:
    """Σ x_i O_K の HNF。生成元がすべて 0 なら MathInputError。"""
    xs = [x for x in xs if not x.is_zero()]
    if not xs:
        raise MathInputError("zero ideal: all generators are zero")
    den = common_denominator(c for x in xs for c in x.coords)
    rows = []
    for x in xs:
        ints = [int(c * den) for c in x.coords]
        for j in range(field.degree):
            rows.append(_int_mul(field, ints, [int(i == j) for i in range(field.degree)]))
    return _make(field, rows, den)


def principal(x: FieldElement) -> FractionalIdeal:
    return ideal_from_generators(x.field, [x])


def parse_ideal(field: NumberField, text: str) -> FractionalIdeal:
    """`2, 1+t` のようなカンマ区切りの生成元リストを読む。"""
    parts = [s for s in (p.strip() for p in text.split(",")) if s]
    if not parts:
        raise MathInputError("no ideal generators given")
    return ideal_from_generators(field, [field.parse_element(s) for s in parts])


# ---------------------------------------------------------------------------
# 演算
# ---------------------------------------------------------------------------

def _check_same_field(a: FractionalIdeal, b: FractionalIdeal) -> None:
    if a.field is not b.field:
        raise MathInputError("ideals belong to different fields")


def ideal_product(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    _check_same_field(a, b)
    rows = [_int_mul(a.field, u, v) for u in a.hnf for v in b.hnf]
    return _make(a.field, rows, a.den * b.den)


def ideal_inverse(a: FractionalIdeal) -> FractionalIdeal:
    """{x : x·a ⊆ O_K} を双対格子として求める。"""
    field = a.field
    n = field.degree
    # 条件: 全ての i, s で Σ_r c_r (ω_r α_i)_s ∈ ℤ  (α_i = 分子の行)
    vectors = []
    for row in a.hnf:
        prods = [_int_mul(field, row, [int(r == j) for j in range(n)]) for r in range(n)]
        for s in range(n):
            vectors.append([prods[r][s] for r in range(n)])
    b = hnf(vectors)
    if len(b) != n:
        raise MathInputError("zero ideal has no inverse")
    binv = rational_inverse(b)
    dual = [[binv[j][i] * a.den for j in range(n)] for i in range(n)]
    inv = _from_fraction_rows(field, dual)
    if DEBUG_CHECKS and not ideal_product(a, inv).is_unit():
        raise VerificationError(f"a * a^-1 != (1) for a = {a}")
    return inv


def ideal_power(a: FractionalIdeal, k: int) -> FractionalIdeal:
    if k < 0:
        return ideal_power(ideal_inverse(a), -k)
    result = unit_ideal(a.field)
    base = a
    while k:
        if k & 1:
            result = ideal_product(result, base)
        base = ideal_product(base, base)
        k >>= 1
    return result


def ideal_quotient(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return ideal_product(a, ideal_inverse(b))


def ideal_norm(a: FractionalIdeal) -> Fraction:
    return a.norm()


def ideal_sum(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    _check_same_field(a, b)
    den = a.den * b.den // gcd(a.den, b.den)
    rows = [[c * (den // a.den) for c in r] for r in a.hnf] + [[c * (den // b.den) for c in r] for r in b.hnf]
    return _make(a.field, rows, den)


def ideal_intersection(a: FractionalIdeal, b: FractionalIdeal) -> FractionalIdeal:
    return ideal_inverse(ideal_sum(ideal_inverse(a), ideal_inverse(b)))


def ideal_contains(a: FractionalIdeal, x: FieldElement) -> bool:
    return a.contains(x)


def ideal_divides(d: FractionalIdeal, f: FractionalIdeal) -> bool:
    """d | f ⇔ f ⊆ d。"""
    _check_same_field(d, f)
    return all(d.contains(x) for x in f.basis())


def are_coprime(a: FractionalIdeal, b: FractionalIdeal) -> bool:
    return ideal_sum(a, b).is_unit()


def integral_part(a: FractionalIdeal) -> FractionalIdeal:
    """a ∩ O_K。"""
    return ideal_intersection(a, unit_ideal(a.field))


# ---------------------------------------------------------------------------
# 剰余環 O_K / f
# ---------------------------------------------------------------------------

def _require_integral(f: FractionalIdeal) -> None:
    if not f.is_integral():
        raise MathInputError(f"{f} is not an integral ideal")


def reduce_mod(x: Sequence[int], f: FractionalIdeal) -> Residue:
    """整元 (整数座標) の O_K/f での正規代表元。各座標は [0, h_ii) に入る。"""
    _require_integral(f)
    v = list(x)
    for i, row in enumerate(f.hnf):
        q = v[i] // row[i]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return tuple(v)


def residues(f: FractionalIdeal) -> List[Residue]:
    _require_integral(f)
    return [tuple(r) for r in itertools.product(*(range(f.hnf[i][i]) for i in range(f.degree)))]


def residue_mul(f: FractionalIdeal, x: Residue, y: Residue) -> Residue:
    return reduce_mod(_int_mul(f.field, x, y), f)


# ---------------------------------------------------------------------------
# 素イデアル分解
# ---------------------------------------------------------------------------

_T = Symbol("T")


def _charpoly(x: FieldElement) -> Poly:
    m = Matrix(x.mult_matrix())
    return Poly(m.charpoly(_T).as_expr(), _T)


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _p_maximal_element(field: NumberField, p: int) -> Tuple[FieldElement, Poly]:
    """ℤ_p[ω] = O_K ⊗ ℤ_p となる整元 ω (とその特性多項式)。"""
    target = _vp(field.discriminant, p)
    n = field.degree
    candidates: List[FieldElement] = [field.theta] + [field.basis_element(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            for k in (1, 2, 3, -1):
                if i != j:
                    candidates.append(field.basis_element(i) + field.basis_element(j) * k)
    for w in candidates:
        chi = _charpoly(w)
        if sympy.gcd(chi, chi.diff(_T)).degree() > 0:
            continue
        d = int(sympy.discriminant(chi.as_expr(), _T))
        if _vp(d, p) == target:
            return w, chi
    raise MathInputError(f"no p-maximal generator found for p={p}; supply prime factorization data for this field")


@lru_cache(maxsize=None)
def primes_above(field: NumberField, p: int) -> Tuple[PrimeIdeal, ...]:
    """p O_K = ∏ P^e の素イデアル (ノルム・HNF 順)。"""
    if not sympy.isprime(p):
        raise MathInputError(f"{p} is not prime")
    if field.degree == 1:
        return (PrimeIdeal(p, principal(field.from_int(p)), 1, 1),)
    w, chi = _p_maximal_element(field, p)
    out = []
    for h, e in Poly(chi.as_expr(), _T, modulus=p).factor_list()[1]:
        hw = field.zero
        for c in h.all_coeffs():
            hw = hw * w + int(c)
        P = ideal_from_generators(field, [field.from_int(p), hw])
        deg = h.degree()
        if P.norm() != p ** deg:
            raise VerificationError(f"prime above {p} has norm {P.norm()}, expected {p ** deg}")
        out.append(PrimeIdeal(p, P, deg, e))
    if sum(P.residue_degree * P.ramification for P in out) != field.degree:
        raise VerificationError(f"sum of e*f over primes above {p} != degree")
    return tuple(sorted(out, key=lambda P: P.ideal.sort_key()))


def factor_ideal(a: FractionalIdeal) -> List[Tuple[PrimeIdeal, int]]:
    """整イデアルの素イデアル分解。(1) は空リスト。"""
    _require_integral(a)
    n = a.norm()
    cur = a
    out: List[Tuple[PrimeIdeal, int]] = []
    for p in sorted(prime_factors(int(n))):
        for P in primes_above(a.field, p):
            e = 0
            while ideal_divides(P.ideal, cur):
                cur = ideal_quotient(cur, P.ideal)
                e += 1
            if e:
                out.append((P, e))
    if not cur.is_unit():
        raise VerificationError(f"factorization of {a} left cofactor {cur}")
    return out


def product_of_factors(field: NumberField, factors: Iterable[Tuple[PrimeIdeal, int]]) -> FractionalIdeal:
    result = unit_ideal(field)
    for P, e in factors:
        result = ideal_product(result, ideal_power(P.ideal, e))
    return result


def prime_divisors(f: FractionalIdeal) -> List[PrimeIdeal]:
    return [P for P, _e in factor_ideal(f)]


@lru_cache(maxsize=None)
def enumerate_ideals(field: NumberField, bound: int) -> Tuple[FractionalIdeal, ...]:
    """ノルム ≤ bound の整イデアル全体 (ノルム, HNF 順)。"""
    if bound < 1:
        raise MathInputError("bound must be >= 1")
    found: List[Tuple[FractionalIdeal, int]] = [(unit_ideal(field), 1)]
    for p in sympy.primerange(2, bound + 1):
        for P in primes_above(field, int(p)):
            q = P.norm
            if q > bound:
                continue
            grown = []
            for ideal, nm in found:
                cur, m = ideal, nm * q
                while m <= bound:
                    cur = ideal_product(cur, P.ideal)
                    grown.append((cur, m))
                    m *= q
            found.extend(grown)
    return tuple(sorted((i for i, _ in found), key=FractionalIdeal.sort_key))


def divisors_of(f: FractionalIdeal) -> List[FractionalIdeal]:
    """f の整因子すべて (ノルム, HNF 順)。"""
    divs = [unit_ideal(f.field)]
    for P, e in factor_ideal(f):
        grown = []
        for d in divs:
            cur = d
            for _ in range(e):
                cur = ideal_product(cur, P.ideal)
                grown.append(cur)
        divs.extend(grown)
    return sorted(divs, key=FractionalIdeal.sort_key)


# ---------------------------------------------------------------------------
# 単数の像
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitImage:
    """O_K^× → (O_K/f)^× × {±1}^{r1} の像のデータ。"""

    modulus: FractionalIdeal
    residue_unit_count: int
    target_order: int
    image_order: int
    torsion_period: int
    periods: Tuple[int, ...]

    @property
    def index(self) -> int:
        return self.target_order // self.image_order


def is_residue_unit(f: FractionalIdeal, r: Residue, primes: Sequence[PrimeIdeal]) -> bool:
    x = f.field.element(r)
    return not any(P.ideal.contains(x) for P in primes)


def unit_period(q: FractionalIdeal, unit: FieldElement, strict: bool = True) -> int:
    """unit の (O_K/q)^× × {±1}^{r1} での位数 (strict=False なら符号は無視)。"""
    _require_integral(q)
    u = reduce_mod(unit.int_coords(), q)
    one = reduce_mod(q.field.one.int_coords(), q)
    sign = unit.sign_vector() if (strict and q.field.r1) else ()
    r, s, k = u, sign, 1
    while not (r == one and all(x > 0 for x in s)):
        r = residue_mul(q, r, u)
        s = tuple(a * b for a, b in zip(s, sign))
        k += 1
    return k


def unit_image(f: FractionalIdeal, strict: bool = True) -> UnitImage:
    _require_integral(f)
    field = f.field
    primes = prime_divisors(f)
    phi = sum(1 for r in residues(f) if is_residue_unit(f, r, primes))
    r1 = field.r1 if strict else 0
    one = (reduce_mod(field.one.int_coords(), f), (1,) * r1)
    gens = []
    for u in field.units.generators():
        sign = u.sign_vector() if r1 else ()
        gens.append((reduce_mod(u.int_coords(), f), sign))
    seen = {one}
    frontier = [one]
    while frontier:
        r, s = frontier.pop()
        for gr, gs in gens:
            nxt = (residue_mul(f, r, gr), tuple(a * b for a, b in zip(s, gs)))
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    units = field.units
    return UnitImage(
        modulus=f,
        residue_unit_count=phi,
        target_order=phi * 2 ** r1,
        image_order=len(seen),
        torsion_period=unit_period(f, units.torsion, strict),
        periods=tuple(unit_period(f, e, strict) for e in units.fundamental),
    )


__all__ = [
    "FractionalIdeal",
    "PrimeIdeal",
    "UnitImage",
    "set_debug_checks",
    "unit_ideal",
    "ideal_from_generators",
    "principal",
    "parse_ideal",
    "ideal_product",
    "ideal_inverse",
    "ideal_power",
    "ideal_quotient",
    "ideal_norm",
    "ideal_sum",
    "ideal_intersection",
    "ideal_contains",
    "ideal_divides",
    "are_coprime",
    "integral_part",
    "reduce_mod",
    "residues",
    "residue_mul",
    "primes_above",
    "factor_ideal",
    "product_of_factors",
    "prime_divisors",
    "enumerate_ideals",
    "divisors_of",
    "is_residue_unit",
    "unit_period",
    "unit_image",
]
