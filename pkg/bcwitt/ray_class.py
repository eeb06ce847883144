"""狭義 (strict) 射類群 Cl^+_f と合同条件つき生成元探索。

生成元探索は Minkowski 埋め込みで座標の箱を見積もり、HNF 格子の点を後退代入で列挙する。
見つかった生成元 x0 から x0·ζ^j·ε^k を単数の周期だけ掃けば、
「総正かつ x - 1 ∈ m」となる生成元の有無が決まる。

射類群は素イデアルの類を BFS で閉包し、Schreier 関係式から不変因子を求める。
位数は解析的な公式 h·|(O/f)^×|·2^{r1} / [O^× : U^+_{f,1}] と必ず照合する。
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from types import MappingProxyType
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple
import itertools
import logging

import mpmath
import sympy

from .core_arith import Element, FiniteAbelianGroup, QuotientMap, group_from_relations, group_from_table, int_det
from .errors import InconclusiveSearchError, MathInputError, VerificationError
from .ideal_arith import (
    FractionalIdeal,
    PrimeIdeal,
    Residue,
    UnitImage,
    _int_mul,
    are_coprime,
    factor_ideal,
    ideal_inverse,
    ideal_product,
    ideal_quotient,
    integral_part,
    is_residue_unit,
    prime_divisors,
    primes_above,
    reduce_mod,
    residue_mul,
    residues,
    unit_ideal,
    unit_image,
    unit_period,
)
from .number_field import FieldElement, NumberField, embeddings, minkowski_bound, unit_spread

logger = logging.getLogger(__name__)

# 生成元の上限ノルムを何回まで倍にするか
MAX_BOUND_DOUBLINGS = 6


# ---------------------------------------------------------------------------
# 生成元探索
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _box_multipliers(field: NumberField) -> Tuple[float, ...]:
    """|埋め込み| ≤ R のとき整基底座標 |c_k| ≤ κ_k·R となる κ_k。"""
    n = field.degree
    rows = []
    for i in range(n):
        emb = embeddings(field, field.basis_element(i))
        real = [z.real for z in emb[: field.r1]]
        cplx = [part for z in emb[field.r1:] for part in (z.real, z.imag)]
        rows.append(real + cplx)
    inv = mpmath.inverse(mpmath.matrix(rows))
    return tuple(float(sum(abs(inv[j, k]) for j in range(n))) for k in range(n))


def _int_norm(field: NumberField, y: Sequence[int]) -> int:
    n = field.degree
    return int_det([_int_mul(field, y, [int(i == j) for j in range(n)]) for i in range(n)])


def _lattice_points(h: Sequence[Sequence[int]], bounds: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """y = Σ v_i h_i で |y_k| ≤ bounds[k] の格子点 (h は上三角 HNF)。"""
    n = len(h)

    def rec(k: int, partial: List[int]) -> Iterator[Tuple[int, ...]]:
        if k == n:
            yield tuple(partial)
            return
        piv = h[k][k]
        s = partial[k]
        lo = -((bounds[k] + s) // piv)
        hi = (bounds[k] - s) // piv
        for v in range(lo, hi + 1):
            nxt = [a + v * b for a, b in zip(partial, h[k])] if v else partial
            yield from rec(k + 1, nxt)

    yield from rec(0, [0] * n)


def find_generator(c: FractionalIdeal) -> Optional[FieldElement]:
    """(x) = c となる x。次数 ≤ 2 では None は「単項でない」ことの証明になる。"""
    field = c.field
    n = field.degree
    if n == 1:
        return field.from_int(Fraction(c.hnf[0][0], c.den))
    target = 1
    for i in range(n):
        target *= c.hnf[i][i]
    radius = float(mpmath.root(target, n)) * unit_spread(field) * (1 + 1e-9) + 1e-9
    bounds = [int(floor(k * radius)) + 1 for k in _box_multipliers(field)]
    for y in _lattice_points(c.hnf, bounds):
        if any(y) and abs(_int_norm(field, y)) == target:
            return field.element(Fraction(v, c.den) for v in y)
    if n > 2:
        raise InconclusiveSearchError(f"no generator of {c} found within the embedding box; completeness not certified for degree {n}")
    return None


def congruent_generator(c: FractionalIdeal, m: FractionalIdeal, strict: bool = True) -> Optional[FieldElement]:
    """(x) = c, x 総正 (strict 時), x - 1 ∈ m を満たす x。なければ None。"""
    field = c.field
    x0 = find_generator(c)
    if x0 is None:
        return None
    q = integral_part(ideal_quotient(m, c))
    units = field.units
    check_sign = strict and field.r1 > 0
    periods = [unit_period(q, e, strict) for e in units.fundamental]
    zeta = [units.torsion ** j for j in range(units.torsion_order)]
    eps_powers = [[e ** k for k in range(p)] for e, p in zip(units.fundamental, periods)]
    if check_sign:
        s0 = x0.sign_vector()
        zeta_signs = [z.sign_vector() for z in zeta]
        eps_signs = [[u.sign_vector() for u in powers] for powers in eps_powers]
    for j, z in enumerate(zeta):
        for ks in itertools.product(*(range(p) for p in periods)):
            if check_sign:
                sign = list(s0)
                for other in [zeta_signs[j]] + [eps_signs[i][k] for i, k in enumerate(ks)]:
                    sign = [a * b for a, b in zip(sign, other)]
                if any(s < 0 for s in sign):
                    continue
            x = x0 * z
            for i, k in enumerate(ks):
                x = x * eps_powers[i][k]
            if m.contains(x - 1):
                return x
    return None


def ray_equivalent(a: FractionalIdeal, b: FractionalIdeal, f: FractionalIdeal, strict: bool = True) -> bool:
    """a·b^{-1} が総正かつ 1 + f·b^{-1} に入る生成元を持つか。"""
    b_inv = ideal_inverse(b)
    return congruent_generator(ideal_product(a, b_inv), ideal_product(f, b_inv), strict) is not None


# ---------------------------------------------------------------------------
# (O_K/f)^×
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueUnits:
    modulus: FractionalIdeal
    group: FiniteAbelianGroup
    table: Dict[Residue, Element] = dc_field(compare=False)

    @property
    def order(self) -> int:
        return self.group.order

    def dlog(self, r: Residue) -> Element:
        key = reduce_mod(r, self.modulus)
        if key not in self.table:
            raise MathInputError(f"{r} is not a unit modulo {self.modulus}")
        return self.table[key]


def residue_units(f: FractionalIdeal) -> ResidueUnits:
    if not f.is_integral():
        raise MathInputError(f"{f} is not integral")
    primes = prime_divisors(f)
    units = [r for r in residues(f) if is_residue_unit(f, r, primes)]
    one = reduce_mod(f.field.one.int_coords(), f)
    group, table = group_from_table(units, lambda x, y: residue_mul(f, x, y), one)
    return ResidueUnits(f, group, table)


# ---------------------------------------------------------------------------
# 射類群
# ---------------------------------------------------------------------------

def ray_class_number(f: FractionalIdeal, strict: bool = True) -> int:
    """解析公式による位数。"""
    ui = unit_image(f, strict)
    total = f.field.class_number * ui.target_order
    if total % ui.image_order:
        raise VerificationError(f"unit image order {ui.image_order} does not divide {total}")
    return total // ui.image_order


@dataclass(frozen=True, eq=False)
class RayClassGroup:
    """不変。生成元の類は prime_classes、それ以外の素イデアルの類は _prime_class がキャッシュする。"""

    field: NumberField
    modulus: FractionalIdeal
    strict: bool
    group: FiniteAbelianGroup
    generators: Tuple[PrimeIdeal, ...]
    generator_images: Tuple[Element, ...]
    representatives: Mapping[Element, FractionalIdeal]
    unit_data: UnitImage
    coprime_to: Optional[FractionalIdeal] = None
    prime_classes: Mapping[FractionalIdeal, Element] = dc_field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return self.group.order

    def _locate(self, a: FractionalIdeal) -> Element:
        for elem, rep in self.representatives.items():
            if ray_equivalent(a, rep, self.modulus, self.strict):
                return elem
        raise VerificationError(f"{a} matches no class representative of the ray class group mod {self.modulus}")

    def class_of(self, a: FractionalIdeal) -> Element:
        """f と素な整イデアル a の類 (指数ベクトル)。"""
        if not a.is_integral():
            raise MathInputError(f"{a} is not integral")
        if not are_coprime(a, self.modulus):
            raise MathInputError(f"{a} is not coprime to the modulus {self.modulus}")
        acc = self.group.identity
        for P, e in factor_ideal(a):
            img = self.prime_classes.get(P.ideal)
            if img is None:
                img = _prime_class(self, P.ideal)
            acc = self.group.add(acc, self.group.scale(img, e))
        return acc

    def representative(self, elem: Element) -> FractionalIdeal:
        return self.representatives[self.group.reduce(elem)]

    def artin_table(self) -> List[Tuple[FractionalIdeal, Element]]:
        return [(P.ideal, img) for P, img in zip(self.generators, self.generator_images)]

    def to_dict(self) -> Dict:
        return {
            "modulus": self.modulus.to_dict(),
            "strict": self.strict,
            "invariant_factors": list(self.group.invariants),
            "order": self.order,
            "generators": [P.ideal.to_dict() for P in self.generators],
            "artin_table": [{"ideal": I.to_dict(), "class": list(v)} for I, v in self.artin_table()],
        }


@lru_cache(maxsize=None)
def _prime_class(G: RayClassGroup, P: FractionalIdeal) -> Element:
    return G._locate(P)


def _candidate_primes(field: NumberField, bound: int, avoid: Sequence[FractionalIdeal]) -> List[PrimeIdeal]:
    out = []
    for p in sympy.primerange(2, bound + 1):
        for P in primes_above(field, int(p)):
            if P.norm <= bound and all(are_coprime(P.ideal, a) for a in avoid):
                out.append(P)
    return out


def _close_classes(
    f: FractionalIdeal, strict: bool, gens: Sequence[PrimeIdeal], limit: int
) -> Tuple[List[FractionalIdeal], List[Tuple[int, ...]], List[List[int]]]:
    """生成元で閉じるまで類代表を BFS で集め、Schreier 関係式を返す。"""
    field = f.field
    g = len(gens)
    reps: List[FractionalIdeal] = [unit_ideal(field)]
    words: List[Tuple[int, ...]] = [(0,) * g]
    relations: List[List[int]] = []
    queue = [0]
    while queue:
        c = queue.pop(0)
        for i, P in enumerate(gens):
            J = ideal_product(reps[c], P.ideal)
            hit = next((d for d, R in enumerate(reps) if ray_equivalent(J, R, f, strict)), None)
            step = list(words[c])
            step[i] += 1
            if hit is None:
                if len(reps) >= limit:
                    raise VerificationError(f"more ray classes than the order formula allows ({limit}) mod {f}")
                reps.append(J)
                words.append(tuple(step))
                queue.append(len(reps) - 1)
            else:
                relations.append([a - b for a, b in zip(step, words[hit])])
    return reps, words, relations


def ray_class_group(
    f: FractionalIdeal, strict: bool = True, coprime_to: Optional[FractionalIdeal] = None
) -> RayClassGroup:
    """Cl^+_f (strict=False なら通常の射類群)。"""
    return _ray_class_group(f.field, f, strict, coprime_to)


@lru_cache(maxsize=None)
def _ray_class_group(
    field: NumberField, f: FractionalIdeal, strict: bool, coprime_to: Optional[FractionalIdeal]
) -> RayClassGroup:
    if not f.is_integral():
        raise MathInputError(f"modulus {f} must be integral")
    ui = unit_image(f, strict)
    expected = ray_class_number(f, strict)
    avoid = [f] + ([coprime_to] if coprime_to is not None else [])
    bound = max(2, int(ceil(minkowski_bound(field) * float(f.norm()))))
    for _ in range(MAX_BOUND_DOUBLINGS + 1):
        gens = _candidate_primes(field, bound, avoid)
        reps, words, relations = _close_classes(f, strict, gens, expected)
        if len(reps) == expected:
            break
        logger.info("ray class mod %s: %d of %d classes with prime bound %d; doubling", f, len(reps), expected, bound)
        bound *= 2
    else:
        raise VerificationError(f"ray class group mod {f} stuck at {len(reps)} classes, order formula says {expected}")
    qmap: QuotientMap = group_from_relations(len(gens), relations)
    if qmap.group.order != expected:
        raise VerificationError(f"relation lattice gives order {qmap.group.order}, expected {expected}")
    representatives = {qmap(w): R for w, R in zip(words, reps)}
    if len(representatives) != expected:
        raise VerificationError("class representatives collide in the quotient")
    images = tuple(qmap.generator_images())
    return RayClassGroup(
        field=field,
        modulus=f,
        strict=strict,
        group=qmap.group,
        generators=tuple(gens),
        generator_images=images,
        representatives=MappingProxyType(representatives),
        unit_data=ui,
        coprime_to=coprime_to,
        prime_classes=MappingProxyType({P.ideal: img for P, img in zip(gens, images)}),
    )


def class_of(G: RayClassGroup, a: FractionalIdeal) -> Element:
    return G.class_of(a)


__all__ = [
    "ResidueUnits",
    "RayClassGroup",
    "find_generator",
    "congruent_generator",
    "ray_equivalent",
    "residue_units",
    "ray_class_number",
    "ray_class_group",
    "class_of",
]
