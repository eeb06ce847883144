"""有限レベルの Deligne-Ribet モノイド DR_f。

3 通りに構成して互いに照合する:

A. 整イデアルを同値関係 (総正かつ 1 + f·b^{-1} に入る生成元) で直接割る
B. 因子 d | f ごとの射類群 Cl^+_{f/d} の直和
C. (O_K/f) × Cl^+_f を (O_K/f)^× の反対角作用で割る

要素のラベルは (d, c): d = gcd(a, f), c = a·d^{-1} の Cl^+_{f/d} での類。
並び順は (N(d), HNF(d), c) で固定する。
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

from .core_arith import Element
from .errors import InconclusiveSearchError, MathInputError, VerificationError
from .ideal_arith import (
    FractionalIdeal,
    divisors_of,
    enumerate_ideals,
    ideal_divides,
    ideal_product,
    ideal_quotient,
    ideal_sum,
    is_residue_unit,
    prime_divisors,
    principal,
    residue_mul,
    residues,
    unit_ideal,
)
from .number_field import NumberField
from .ray_class import RayClassGroup, ray_class_group, ray_class_number, ray_equivalent

logger = logging.getLogger(__name__)

Label = Tuple[FractionalIdeal, Element]

# 構成 A で列挙するノルム上限の既定値 (倍々で ceiling まで広げる)
DEFAULT_CEILING_FACTOR = 64


@dataclass(frozen=True)
class DRElement:
    divisor: FractionalIdeal
    cls: Element
    representative: FractionalIdeal

    @property
    def label(self) -> Label:
        return (self.divisor, self.cls)

    def to_dict(self) -> Dict:
        return {
            "divisor": self.divisor.to_dict(),
            "class": list(self.cls),
            "repr": self.representative.to_dict(),
        }


@dataclass(eq=False)
class DRMonoid:
    field: NumberField
    modulus: FractionalIdeal
    elements: Tuple[DRElement, ...]
    table: Tuple[Tuple[int, ...], ...]
    construction: str
    classifier: Callable[[FractionalIdeal], int] = dc_field(repr=False)
    convention: Optional[str] = None

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def identity(self) -> int:
        return self.classify(unit_ideal(self.field))

    @property
    def components(self) -> Dict[FractionalIdeal, Tuple[int, ...]]:
        out: Dict[FractionalIdeal, List[int]] = {}
        for i, e in enumerate(self.elements):
            out.setdefault(e.divisor, []).append(i)
        return {d: tuple(ix) for d, ix in out.items()}

    def mul(self, i: int, j: int) -> int:
        return self.table[i][j]

    def classify(self, a: FractionalIdeal) -> int:
        """整イデアル a の類の添字。"""
        if not a.is_integral():
            raise MathInputError(f"{a} is not integral")
        return self.classifier(a)

    def act(self, a: FractionalIdeal, x: int) -> int:
        return self.table[self.classify(a)][x]

    def is_associative(self) -> bool:
        r = range(self.size)
        t = self.table
        return all(t[t[i][j]][k] == t[i][t[j][k]] for i in r for j in r for k in r)

    def is_commutative(self) -> bool:
        r = range(self.size)
        return all(self.table[i][j] == self.table[j][i] for i in r for j in r)

    def is_unital(self) -> bool:
        e = self.identity
        return all(self.table[e][i] == i and self.table[i][e] == i for i in range(self.size))

    def isomorphism_to(self, other: "DRMonoid") -> List[int]:
        """代表元を other で分類して得る全単射。準同型でなければ VerificationError。"""
        phi = [other.classify(e.representative) for e in self.elements]
        if sorted(phi) != list(range(other.size)):
            raise VerificationError(f"construction {self.construction} -> {other.construction}: map is not a bijection ({phi})")
        for i in range(self.size):
            for j in range(self.size):
                if phi[self.table[i][j]] != other.table[phi[i]][phi[j]]:
                    raise VerificationError(
                        f"construction {self.construction} -> {other.construction}: product of {i} and {j} not preserved"
                    )
        return phi

    def to_dict(self) -> Dict:
        return {
            "construction": self.construction,
            "convention": self.convention,
            "modulus": self.modulus.to_dict(),
            "size": self.size,
            "elements": [e.to_dict() for e in self.elements],
            "table": [list(r) for r in self.table],
        }


# ---------------------------------------------------------------------------
# ラベル付け
# ---------------------------------------------------------------------------

class Labeler:
    """イデアル a ↦ (gcd(a, f), a·d^{-1} の Cl^+_{f/d} での類)。"""

    def __init__(self, f: FractionalIdeal):
        self.modulus = f
        self.divisors = divisors_of(f)
        self.groups: Dict[FractionalIdeal, RayClassGroup] = {
            d: ray_class_group(ideal_quotient(f, d), strict=True, coprime_to=f) for d in self.divisors
        }

    def label(self, a: FractionalIdeal) -> Label:
        d = ideal_sum(a, self.modulus)
        return d, self.groups[d].class_of(ideal_quotient(a, d))

    def all_labels(self) -> List[Label]:
        return [(d, c) for d in self.divisors for c in self.groups[d].group.elements()]

    def representative(self, label: Label) -> FractionalIdeal:
        d, c = label
        return ideal_product(d, self.groups[d].representative(c))

    def expected_size(self) -> int:
        return sum(ray_class_number(ideal_quotient(self.modulus, d)) for d in self.divisors)


def _label_key(label: Label):
    d, c = label
    return (d.sort_key(), c)


@lru_cache(maxsize=None)
def _labeler(field: NumberField, f: FractionalIdeal) -> Labeler:
    return Labeler(f)


def labeler(f: FractionalIdeal) -> Labeler:
    return _labeler(f.field, f)


def _label_classifier(lab: Labeler, index: Dict[Label, int]) -> Callable[[FractionalIdeal], int]:
    def classify(a: FractionalIdeal) -> int:
        key = lab.label(a)
        if key not in index:
            raise VerificationError(f"label {key} of {a} is not an element")
        return index[key]

    return classify


def dr_size(f: FractionalIdeal) -> int:
    """Σ_{d|f} h^+_{f/d} (位数公式による)。"""
    return labeler(f).expected_size()


# ---------------------------------------------------------------------------
# 構成 A
# ---------------------------------------------------------------------------

def dr_equivalent(a: FractionalIdeal, b: FractionalIdeal, f: FractionalIdeal) -> bool:
    """a ∼_f b (両向きのどちらかで条件が成り立てば同値とする)。"""
    for x in (a, b, f):
        if not x.is_integral():
            raise MathInputError(f"{x} is not integral")
    if a == b:
        return True
    return ray_equivalent(a, b, f) or ray_equivalent(b, a, f)


def dr_partition(f: FractionalIdeal, norm_bound: int) -> List[List[FractionalIdeal]]:
    """ノルム ≤ norm_bound の整イデアルを ∼_f の推移閉包で分ける。

    位数公式は使わず、gcd の等しい組をすべて比べて union-find で併合する。
    """
    if not f.is_integral():
        raise MathInputError(f"modulus {f} must be integral")
    ideals = enumerate_ideals(f.field, norm_bound)
    gcds = [ideal_sum(a, f) for a in ideals]
    parent = list(range(len(ideals)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(ideals)):
        for j in range(i):
            if gcds[i] != gcds[j]:
                continue
            ri, rj = find(i), find(j)
            if ri != rj and dr_equivalent(ideals[i], ideals[j], f):
                parent[ri] = rj
    classes: Dict[int, List[FractionalIdeal]] = {}
    for i, a in enumerate(ideals):
        classes.setdefault(find(i), []).append(a)
    return list(classes.values())


def dr_quotient(
    f: FractionalIdeal, norm_bound: Optional[int] = None, ceiling: Optional[int] = None
) -> DRMonoid:
    """構成 A: ノルム ≤ norm_bound の整イデアルを ∼_f で分割する。"""
    field = f.field
    lab = labeler(f)
    expected = lab.expected_size()
    bound = norm_bound or max(2 * int(f.norm()), 8)
    ceiling = ceiling or bound * DEFAULT_CEILING_FACTOR
    while True:
        buckets: Dict[FractionalIdeal, List[FractionalIdeal]] = {}
        for a in enumerate_ideals(field, bound):
            bucket = buckets.setdefault(ideal_sum(a, f), [])
            if not any(dr_equivalent(a, r, f) for r in bucket):
                bucket.append(a)
        reps = [r for bucket in buckets.values() for r in bucket]
        if len(reps) > expected:
            raise VerificationError(f"DR mod {f}: {len(reps)} classes exceed the expected {expected}")
        if len(reps) == expected:
            break
        if bound * 2 > ceiling:
            raise InconclusiveSearchError(
                f"DR mod {f}: only {len(reps)} of {expected} classes among ideals of norm <= {bound} (ceiling {ceiling})"
            )
        logger.info("DR mod %s: %d of %d classes at norm bound %d; doubling", f, len(reps), expected, bound)
        bound *= 2

    labels = [lab.label(r) for r in reps]
    if len(set(labels)) != len(labels):
        raise VerificationError(f"DR mod {f}: distinct classes share a label")
    order = sorted(range(len(reps)), key=lambda i: _label_key(labels[i]))
    reps = [reps[i] for i in order]
    labels = [labels[i] for i in order]

    def classify(a: FractionalIdeal) -> int:
        d = ideal_sum(a, f)
        for i, r in enumerate(reps):
            if ideal_sum(r, f) == d and dr_equivalent(a, r, f):
                return i
        raise VerificationError(f"DR mod {f}: {a} falls in no class")

    table = tuple(tuple(classify(ideal_product(reps[i], reps[j])) for j in range(len(reps))) for i in range(len(reps)))
    elements = tuple(DRElement(d, c, r) for (d, c), r in zip(labels, reps))
    return DRMonoid(field, f, elements, table, "a", classify)


# ---------------------------------------------------------------------------
# 構成 B
# ---------------------------------------------------------------------------

def dr_structural(f: FractionalIdeal, check_against: Optional[DRMonoid] = None) -> DRMonoid:
    """構成 B: ∐_{d|f} Cl^+_{f/d}。A への写像が全単射準同型であることを確かめる。"""
    field = f.field
    lab = labeler(f)
    labels = sorted(lab.all_labels(), key=_label_key)
    index = {l: i for i, l in enumerate(labels)}
    reps = [lab.representative(l) for l in labels]
    table = []
    for d1, c1 in labels:
        row = []
        for d2, c2 in labels:
            dd = ideal_product(d1, d2)
            d3 = ideal_sum(dd, f)
            r = ideal_product(ideal_quotient(dd, d3), ideal_product(lab.groups[d1].representative(c1), lab.groups[d2].representative(c2)))
            row.append(index[(d3, lab.groups[d3].class_of(r))])
        table.append(tuple(row))
    elements = tuple(DRElement(d, c, r) for (d, c), r in zip(labels, reps))
    mono = DRMonoid(field, f, elements, tuple(table), "b", _label_classifier(lab, index))
    target = check_against if check_against is not None else dr_quotient(f)
    phi = [target.classify(r) for r in reps]
    if sorted(phi) != list(range(target.size)):
        seen: Dict[int, Label] = {}
        for l, j in zip(labels, phi):
            if j in seen:
                raise VerificationError(f"pairs {seen[j]} and {l} map to the same class of construction A")
            seen[j] = l
        raise VerificationError(f"construction B has {len(labels)} elements, construction A has {target.size}")
    mono.isomorphism_to(target)
    return mono


# ---------------------------------------------------------------------------
# 構成 C
# ---------------------------------------------------------------------------

def positive_lift(f: FractionalIdeal, r: Sequence[int]):
    """r + k·N(f) (k ≥ 0 最小) で 0 でない総正な持ち上げ。"""
    field = f.field
    step = int(f.norm())
    x = field.element(r)
    while x.is_zero() or (field.r1 and not x.is_totally_positive()):
        x = x + step
    return x


def _orbit_model(f: FractionalIdeal, G: RayClassGroup, sign: int):
    field = f.field
    ring = residues(f)
    primes = prime_divisors(f)
    unit_res = [u for u in ring if is_residue_unit(f, u, primes)]
    s = {u: G.class_of(principal(positive_lift(f, u))) for u in unit_res}
    points = [(r, c) for r in ring for c in G.group.elements()]
    orbit_of: Dict[Tuple, int] = {}
    orbits: List[Tuple] = []
    for pt in points:
        if pt in orbit_of:
            continue
        r, c = pt
        members = {(residue_mul(f, u, r), G.group.add(c, G.group.scale(s[u], sign))) for u in unit_res}
        rep = min(members)
        for m in members:
            if m in orbit_of:
                raise VerificationError(f"orbits overlap at {m}")
            orbit_of[m] = len(orbits)
        orbits.append(rep)
    return orbits, orbit_of, s


def _try_convention(f: FractionalIdeal, sign: int, target: DRMonoid) -> Optional[DRMonoid]:
    field = f.field
    G = ray_class_group(f, strict=True)
    orbits, orbit_of, _s = _orbit_model(f, G, sign)
    if len(orbits) != target.size:
        return None

    def to_target(pt) -> int:
        r, c = pt
        return target.classify(ideal_product(principal(positive_lift(f, r)), G.representative(c)))

    images = {pt: to_target(pt) for pt in orbit_of}
    for pt, o in orbit_of.items():
        if images[pt] != images[orbits[o]]:
            return None
    phi = [images[o] for o in orbits]
    if sorted(phi) != list(range(target.size)):
        return None
    members: Dict[int, List[Tuple]] = {}
    for pt, o in orbit_of.items():
        members.setdefault(o, []).append(pt)
    table = [[0] * len(orbits) for _ in orbits]
    for i in range(len(orbits)):
        for j in range(len(orbits)):
            prods = {
                orbit_of[(residue_mul(f, p[0], q[0]), G.group.add(p[1], q[1]))]
                for p in members[i]
                for q in members[j]
            }
            if len(prods) != 1:
                return None
            table[i][j] = prods.pop()
    # A のラベル順に並べ替える
    order = sorted(range(len(orbits)), key=lambda i: phi[i])
    pos = {old: new for new, old in enumerate(order)}
    new_table = tuple(tuple(pos[table[order[i]][order[j]]] for j in range(len(order))) for i in range(len(order)))
    elements = tuple(target.elements[phi[i]] for i in order)
    lab = labeler(f)
    index = {e.label: i for i, e in enumerate(elements)}
    mono = DRMonoid(field, f, elements, new_table, "c", _label_classifier(lab, index))
    mono.isomorphism_to(target)
    return mono


def dr_fiber_product(f: FractionalIdeal, check_against: Optional[DRMonoid] = None) -> DRMonoid:
    """構成 C: (O_K/f × Cl^+_f) / (O_K/f)^×。作用 u·(r, c) = (ur, s(u)^{-1} c) を先に試す。"""
    target = check_against if check_against is not None else dr_quotient(f)
    for sign, name in ((-1, "inverse"), (1, "direct")):
        mono = _try_convention(f, sign, target)
        if mono is not None:
            mono.convention = name
            if sign == 1:
                logger.info("DR mod %s: fiber product needed the direct action u.(r, c) = (ur, s(u)c)", f)
            return mono
    raise VerificationError(f"fiber product mod {f}: neither action convention gives a well-defined monoid isomorphic to construction A")


# ---------------------------------------------------------------------------
# 共通 API
# ---------------------------------------------------------------------------

CONSTRUCTIONS = ("a", "b", "c")


def build_dr(f: FractionalIdeal, construction: str = "a", norm_bound: Optional[int] = None) -> DRMonoid:
    construction = construction.lower()
    if construction not in CONSTRUCTIONS:
        raise MathInputError(f"unknown construction {construction!r}")
    base = dr_quotient(f, norm_bound=norm_bound)
    if construction == "a":
        return base
    if construction == "b":
        return dr_structural(f, check_against=base)
    return dr_fiber_product(f, check_against=base)


@dataclass(frozen=True)
class Projection:
    source: DRMonoid
    target: DRMonoid
    mapping: Tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def compose(self, inner: "Projection") -> "Projection":
        """self ∘ inner。"""
        if inner.target.modulus != self.source.modulus:
            raise MathInputError("projections do not compose")
        return Projection(inner.source, self.target, tuple(self.mapping[j] for j in inner.mapping))

    def to_dict(self) -> Dict:
        return {
            "source": self.source.modulus.to_dict(),
            "target": self.target.modulus.to_dict(),
            "map": list(self.mapping),
        }


def dr_project(source: DRMonoid, target) -> Projection:
    """π: DR_{f'} → DR_f。target は DRMonoid かイデアル f。"""
    if isinstance(target, FractionalIdeal):
        target = build_dr(target, source.construction)
    if not ideal_divides(target.modulus, source.modulus):
        raise MathInputError(f"{target.modulus} does not divide {source.modulus}")
    mapping = tuple(target.classify(e.representative) for e in source.elements)
    for i in range(source.size):
        for j in range(source.size):
            if mapping[source.table[i][j]] != target.table[mapping[i]][mapping[j]]:
                raise VerificationError(f"projection is not multiplicative at ({i}, {j})")
    if set(mapping) != set(range(target.size)):
        raise VerificationError("projection is not surjective")
    if mapping[source.identity] != target.identity:
        raise VerificationError("projection does not preserve the identity")
    return Projection(source, target, mapping)


def idempotents(D: DRMonoid) -> List[int]:
    return [i for i in range(D.size) if D.table[i][i] == i]


def act(D: DRMonoid, a: FractionalIdeal, x: int) -> int:
    return D.act(a, x)


__all__ = [
    "DRElement",
    "DRMonoid",
    "Labeler",
    "Projection",
    "CONSTRUCTIONS",
    "labeler",
    "dr_size",
    "dr_equivalent",
    "dr_partition",
    "dr_quotient",
    "dr_structural",
    "dr_fiber_product",
    "build_dr",
    "dr_project",
    "positive_lift",
    "idempotents",
    "act",
]
