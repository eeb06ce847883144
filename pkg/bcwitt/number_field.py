"""数体 K と整数環 O_K。

- 次数 1, 2 は整基底・単数・類数をすべて自動計算
- 次数 3 以上は整基底・単数・類数を外部データ (field_data) で受け取り、検証してから使う
- 元は整基底に関する有理座標で持つ (整数座標 ⇔ 整元)
- 総正値判定は real_root_signs による厳密判定 (浮動小数点は探索範囲の見積りにのみ使う)
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd, isqrt
from tokenize import TokenError
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import mpmath
import sympy
from sympy import Poly, Symbol

from .core_arith import (
    IntPolynomial,
    common_denominator,
    parse_expression,
    prime_factors,
    rational_det,
    rational_inverse,
    real_root_signs,
)
from .errors import MathInputError, VerificationError

logger = logging.getLogger(__name__)

Coords = Tuple[Fraction, ...]

# 既約性証明 (次数 4 以上) に使う「良い素数」の個数
IRREDUCIBILITY_PRIMES = 3


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    r = sympy.Rational(x)
    return Fraction(int(r.p), int(r.q))


@dataclass(frozen=True)
class UnitData:
    """単数の入力データ (冪基底 1, θ, θ^2, ... に関する有理座標)。"""

    torsion: Tuple[Fraction, ...]
    torsion_order: int
    fundamental: Tuple[Tuple[Fraction, ...], ...] = ()


@dataclass(frozen=True)
class UnitGroup:
    torsion: "FieldElement"
    torsion_order: int
    fundamental: Tuple["FieldElement", ...]

    def generators(self) -> Tuple["FieldElement", ...]:
        return (self.torsion,) + self.fundamental


@dataclass(frozen=True, eq=False)
class NumberField:
    """K = ℚ[x]/(g)。同一性で比較・ハッシュする (キャッシュのキーに使うため)。"""

    poly: IntPolynomial
    basis: Tuple[Coords, ...]  # 行 i = ω_i の冪基底座標
    mult: Tuple[Tuple[Tuple[int, ...], ...], ...]  # mult[i][j] = ω_i ω_j の整基底座標
    discriminant: int
    signature: Tuple[int, int]
    torsion_coords: Coords
    torsion_order: int
    fundamental_coords: Tuple[Coords, ...]
    class_number: int
    name: str = ""
    _inverse_basis: Tuple[Coords, ...] = dc_field(default=(), repr=False)

    def __repr__(self) -> str:
        return f"NumberField({self.name or self.poly})"

    @property
    def degree(self) -> int:
        return self.poly.degree

    @property
    def r1(self) -> int:
        return self.signature[0]

    # --- 元の生成 ---
    def element(self, coords: Iterable) -> "FieldElement":
        cs = tuple(_frac(c) for c in coords)
        if len(cs) != self.degree:
            raise MathInputError(f"expected {self.degree} coordinates, got {len(cs)}")
        return FieldElement(self, cs)

    def from_power(self, coeffs: Sequence) -> "FieldElement":
        """冪基底の係数 (定数項から) から元を作る。次数 ≥ n の項は g で簡約する。"""
        p = [_frac(c) for c in coeffs]
        n = self.degree
        g = self.poly.coeffs
        for k in range(len(p) - 1, n - 1, -1):
            c = p[k]
            if c:
                for i in range(n):
                    p[k - n + i] -= c * g[i]
            p[k] = Fraction(0)
        p = (p + [Fraction(0)] * n)[:n]
        inv = self._inverse_basis
        return FieldElement(self, tuple(sum((p[k] * inv[k][j] for k in range(n)), Fraction(0)) for j in range(n)))

    def from_int(self, k) -> "FieldElement":
        return self.from_power([k])

    @property
    def one(self) -> "FieldElement":
        return self.from_int(1)

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (Fraction(0),) * self.degree)

    @property
    def theta(self) -> "FieldElement":
        return self.from_power([0, 1])

    def basis_element(self, i: int) -> "FieldElement":
        return FieldElement(self, tuple(Fraction(int(i == j)) for j in range(self.degree)))

    def parse_element(self, text: str, var: str = "t") -> "FieldElement":
        """t (g の根) の有理係数多項式として読む。例: `1+t`, `(3+t)/2`。"""
        sym = Symbol(var)
        try:
            expr = parse_expression(text, var)
            poly = Poly(expr, sym, domain="QQ")
        except (SyntaxError, TokenError, sympy.SympifyError, sympy.polys.polyerrors.BasePolynomialError, TypeError) as e:
            raise MathInputError(f"cannot parse element {text!r}: {e}") from e
        return self.from_power(list(reversed(poly.all_coeffs())))

    @property
    def units(self) -> UnitGroup:
        return UnitGroup(
            torsion=FieldElement(self, self.torsion_coords),
            torsion_order=self.torsion_order,
            fundamental=tuple(FieldElement(self, c) for c in self.fundamental_coords),
        )

    def integral_basis(self) -> List["FieldElement"]:
        return [self.basis_element(i) for i in range(self.degree)]


@dataclass(frozen=True)
class FieldElement:
    field: NumberField
    coords: Coords

    # --- 算術 ---
    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise MathInputError("elements belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = self.field.degree
        mult = self.field.mult
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if not b:
                    continue
                ab = a * b
                for k, m in enumerate(mult[i][j]):
                    if m:
                        out[k] += ab * m
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "FieldElement":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def int_coords(self) -> Tuple[int, ...]:
        if not self.is_integral():
            raise MathInputError(f"{self} is not integral")
        return tuple(int(c) for c in self.coords)

    def mult_matrix(self) -> List[List[Fraction]]:
        """行 i = x·ω_i の整基底座標。"""
        return [list((self * self.field.basis_element(i)).coords) for i in range(self.field.degree)]

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise MathInputError("zero has no inverse")
        inv = rational_inverse(self.mult_matrix())
        one = self.field.one.coords
        n = self.field.degree
        return FieldElement(self.field, tuple(sum((one[i] * inv[i][j] for i in range(n)), Fraction(0)) for j in range(n)))

    def norm(self) -> Fraction:
        return rational_det(self.mult_matrix())

    def trace(self) -> Fraction:
        m = self.mult_matrix()
        return sum((m[i][i] for i in range(len(m))), Fraction(0))

    def power_coeffs(self) -> Coords:
        basis = self.field.basis
        n = self.field.degree
        return tuple(sum((self.coords[i] * basis[i][k] for i in range(n)), Fraction(0)) for k in range(n))

    def sign_vector(self) -> Tuple[int, ...]:
        """実埋め込み (g の実根の昇順) での符号。"""
        if self.is_zero():
            raise MathInputError("zero has no sign")
        p = self.power_coeffs()
        den = common_denominator(p)
        signs = real_root_signs(self.field.poly, IntPolynomial(int(c * den) for c in p))
        if 0 in signs:
            raise VerificationError(f"nonzero element {self} vanishes at a real place")
        return signs

    def is_totally_positive(self) -> bool:
        return all(s > 0 for s in self.sign_vector())

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.power_coeffs()):
            if not c:
                continue
            mon = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            if not mon:
                terms.append(str(c))
            elif c == 1:
                terms.append(mon)
            elif c == -1:
                terms.append("-" + mon)
            else:
                terms.append(f"{c}*{mon}")
        return "+".join(terms).replace("+-", "-") if terms else "0"


def norm_trace(x: FieldElement) -> Tuple[Fraction, Fraction]:
    return x.norm(), x.trace()


def is_totally_positive(x: FieldElement) -> bool:
    """実素点すべてで正なら True。実素点がなければ (x ≠ 0 である限り) True。"""
    if x.is_zero():
        raise MathInputError("zero is not totally positive or negative")
    if x.field.r1 == 0:
        return True
    return x.is_totally_positive()


# ---------------------------------------------------------------------------
# 既約性
# ---------------------------------------------------------------------------

def _subset_sums(degrees: Sequence[int]) -> set:
    sums = {0}
    for d in degrees:
        sums |= {s + d for s in sums}
    return sums


def check_irreducible(g: IntPolynomial) -> None:
    """可約なら MathInputError。次数 4 以上で証明できなければ MathInputError("cannot certify")。"""
    n = g.degree
    if n < 1:
        raise MathInputError("defining polynomial must have degree >= 1")
    if n == 1:
        return
    if n <= 3:
        c0 = g.coeffs[0]
        if c0 == 0:
            raise MathInputError(f"{g} is reducible (root 0)")
        for d in sympy.divisors(abs(c0)):
            for r in (d, -d):
                if g(r) == 0:
                    raise MathInputError(f"{g} is reducible (root {r})")
        return
    x = Symbol("x")
    G = g.to_sympy(x)
    disc = int(sympy.discriminant(G.as_expr(), x))
    if disc == 0:
        raise MathInputError(f"{g} is reducible (repeated factor)")
    possible = set(range(n + 1))
    used = 0
    for p in sympy.primerange(2, 10_000):
        if disc % p == 0:
            continue
        degrees: List[int] = []
        for h, e in Poly(G.as_expr(), x, modulus=p).factor_list()[1]:
            degrees.extend([h.degree()] * e)
        possible &= _subset_sums(degrees)
        used += 1
        if possible == {0, n}:
            return
        if used >= IRREDUCIBILITY_PRIMES:
            break
    raise MathInputError(f"cannot certify irreducibility of {g}; possible factor degrees {sorted(possible - {0, n})}")


# ---------------------------------------------------------------------------
# 二次体
# ---------------------------------------------------------------------------

def _squarefree_part(n: int) -> Tuple[int, int]:
    """n = f^2 · D (D 平方因子なし) の (D, f)。"""
    sign = -1 if n < 0 else 1
    D, f = sign, 1
    for p, e in prime_factors(n).items():
        f *= p ** (e // 2)
        if e % 2:
            D *= p
    return D, f


def pell_unit(D: int) -> Tuple[int, int]:
    """p^2 - D q^2 = ±1 の最小正解 (連分数展開)。"""
    a0 = isqrt(D)
    m, d, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, q = 0, 1
    while p * p - D * q * q not in (1, -1):
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


def _cube_root_unit(D: int, p: int, q: int) -> Optional[Tuple[int, int]]:
    """η = p + q√D が ε^3 (ε = (t + b√D)/2) なら (t, b)。"""
    root, _exact = sympy.integer_nthroot(2 * p, 3)
    for N in (1, -1):
        for t in range(max(int(root) - 2, 1), int(root) + 3):
            if t ** 3 - 3 * N * t != 2 * p:
                continue
            b2, r = divmod(t * t - 4 * N, D)
            if r or b2 <= 0:
                continue
            b = isqrt(b2)
            if b * b == b2:
                return t, b
    return None


def _quadratic_data(g: IntPolynomial) -> Dict:
    c, b = g.coeffs[0], g.coeffs[1]
    D, f = _squarefree_part(b * b - 4 * c)
    # √D = (2θ + b) / f
    sqrt_d = (Fraction(b, f), Fraction(2, f))
    if D % 4 == 1:
        omega = ((1 + sqrt_d[0]) / 2, sqrt_d[1] / 2)
        disc = D
    else:
        omega = sqrt_d
        disc = 4 * D
    basis = ((Fraction(1), Fraction(0)), omega)

    def sqrt_d_coords(u: Fraction, v: Fraction) -> Coords:
        """u + v√D の整基底座標。"""
        if D % 4 == 1:
            return (u - v, 2 * v)
        return (u, v)

    fundamental: Tuple[Coords, ...] = ()
    if D == -1:
        torsion, order = sqrt_d_coords(Fraction(0), Fraction(1)), 4
    elif D == -3:
        torsion, order = (Fraction(0), Fraction(1)), 6
    else:
        torsion, order = (Fraction(-1), Fraction(0)), 2
    if D > 0:
        p, q = pell_unit(D)
        eps = sqrt_d_coords(Fraction(p), Fraction(q))
        if D % 4 == 1:
            tb = _cube_root_unit(D, p, q)
            if tb is not None:
                t, bb = tb
                eps = sqrt_d_coords(Fraction(t, 2), Fraction(bb, 2))
        fundamental = (eps,)
    name = f"Q(sqrt({D}))" if D != -1 else "Q(i)"
    return dict(D=D, basis=basis, disc=disc, torsion=torsion, order=order, fundamental=fundamental, name=name)


# ---------------------------------------------------------------------------
# 類数 (二次形式)
# ---------------------------------------------------------------------------

def _class_number_imaginary(d: int) -> int:
    count = 0
    for a in range(1, isqrt(-d // 3) + 2):
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            count += 1
    return count


def _is_reduced_indefinite(a: int, b: int, d: int) -> bool:
    if b <= 0 or b * b >= d:
        return False
    if (2 * abs(a) + b) ** 2 <= d:
        return False
    t = 2 * abs(a) - b
    return t < 0 or t * t < d


def narrow_class_number_real(d: int) -> int:
    """判別式 d > 0 の原始的不定二次形式の簡約サイクル数 (狭義類数)。"""
    s = isqrt(d)
    reduced = set()
    for b in range(1, s + 1):
        if (b - d) % 2 or b * b >= d:
            continue
        ac = (b * b - d) // 4
        for a0 in sympy.divisors(-ac):
            for a in (a0, -a0):
                c = ac // a
                if gcd(gcd(abs(a), b), abs(c)) == 1 and _is_reduced_indefinite(a, b, d):
                    reduced.add((a, b, c))
    cycles = 0
    seen = set()
    for form in sorted(reduced):
        if form in seen:
            continue
        cycles += 1
        cur = form
        while cur not in seen:
            seen.add(cur)
            _a, b, c = cur
            b2 = s - ((s + b) % (2 * abs(c)))
            cur = (c, b2, (b2 * b2 - d) // (4 * c))
            if cur not in reduced:
                raise VerificationError(f"reduction cycle left the reduced set at {cur}")
    return cycles


def _quadratic_class_number(disc: int, unit_norm: Optional[int]) -> int:
    if disc < 0:
        return _class_number_imaginary(disc)
    h_plus = narrow_class_number_real(disc)
    return h_plus if unit_norm == -1 else h_plus // 2


def class_number(field: NumberField) -> int:
    return field.class_number


def narrow_class_number(field: NumberField) -> int:
    """h^+ = h · 2^{r1} / [O^× : O^×_+]。"""
    signs = {(1,) * field.r1}
    gens = [u.sign_vector() for u in field.units.generators()] if field.r1 else []
    frontier = list(signs)
    while frontier:
        s = frontier.pop()
        for g in gens:
            t = tuple(x * y for x, y in zip(s, g))
            if t not in signs:
                signs.add(t)
                frontier.append(t)
    return field.class_number * (2 ** field.r1) // len(signs)


# ---------------------------------------------------------------------------
# 構築
# ---------------------------------------------------------------------------

def _power_mul(n: int, g: Sequence[int], a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (2 * n - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    for k in range(2 * n - 2, n - 1, -1):
        c = out[k]
        if c:
            for i in range(n):
                out[k - n + i] -= c * g[i]
    return out[:n]


def _build(
    g: IntPolynomial,
    basis: Sequence[Sequence[Fraction]],
    torsion: Coords,
    torsion_order: int,
    fundamental: Sequence[Coords],
    class_num: int,
    name: str,
    units_in_power_basis: bool,
) -> NumberField:
    n = g.degree
    basis = tuple(tuple(_frac(c) for c in row) for row in basis)
    if len(basis) != n or any(len(r) != n for r in basis):
        raise MathInputError(f"integral basis must be {n}x{n}")
    if rational_det(basis) == 0:
        raise MathInputError("integral basis matrix is singular")
    inv = tuple(tuple(r) for r in rational_inverse(basis))

    def to_basis(p: Sequence[Fraction]) -> Coords:
        return tuple(sum((p[k] * inv[k][j] for k in range(n)), Fraction(0)) for j in range(n))

    mult = []
    for i in range(n):
        row = []
        for j in range(n):
            c = to_basis(_power_mul(n, g.coeffs, basis[i], basis[j]))
            if any(x.denominator != 1 for x in c):
                raise MathInputError(f"integral basis is not closed under multiplication (w{i}*w{j})")
            row.append(tuple(int(x) for x in c))
        mult.append(tuple(row))
    # ℤ[θ] ⊆ O_K
    for k in range(n):
        if any(x.denominator != 1 for x in to_basis([Fraction(int(i == k)) for i in range(n)])):
            raise MathInputError(f"theta^{k} is not integral in the supplied basis")
    traces = [sum(mult[i][j][j] for j in range(n)) for i in range(n)]
    form = [[sum(mult[i][j][k] * traces[k] for k in range(n)) for j in range(n)] for i in range(n)]
    disc = int(rational_det(form))
    r1 = int(g.to_sympy().count_roots()) if n > 1 else 1
    if units_in_power_basis:
        torsion = to_basis(torsion)
        fundamental = tuple(to_basis(u) for u in fundamental)
    field = NumberField(
        poly=g,
        basis=basis,
        mult=tuple(mult),
        discriminant=disc,
        signature=(r1, (n - r1) // 2),
        torsion_coords=tuple(torsion),
        torsion_order=torsion_order,
        fundamental_coords=tuple(tuple(u) for u in fundamental),
        class_number=class_num,
        name=name,
        _inverse_basis=inv,
    )
    _validate_units(field)
    return field


def _validate_units(field: NumberField) -> None:
    units = field.units
    for u in units.generators():
        if not u.is_integral() or abs(u.norm()) != 1:
            raise MathInputError(f"{u} is not a unit")
    z = units.torsion
    k = units.torsion_order
    if k < 2 or k % 2:
        raise MathInputError(f"torsion order {k} must be even and >= 2")
    if z ** k != field.one or any(z ** (k // p) == field.one for p in prime_factors(k)):
        raise MathInputError(f"torsion generator {z} does not have order {k}")
    rank = field.r1 + field.signature[1] - 1
    if len(units.fundamental) != rank:
        raise MathInputError(f"expected {rank} fundamental units, got {len(units.fundamental)}")


def make_field(
    g: IntPolynomial,
    integral_basis: Optional[Sequence[Sequence]] = None,
    units: Optional[UnitData] = None,
    class_num: Optional[int] = None,
) -> NumberField:
    """K = ℚ[x]/(g) を作る。次数 3 以上では整基底・単数・類数が必須。"""
    if g.leading != 1:
        raise MathInputError(f"{g} must be monic")
    check_irreducible(g)
    n = g.degree
    if n == 1:
        return _build(g, [[1]], (Fraction(-1),), 2, (), 1, "Q", units_in_power_basis=False)
    if n == 2:
        q = _quadratic_data(g)
        field = _build(g, q["basis"], q["torsion"], q["order"], q["fundamental"], 1, q["name"], units_in_power_basis=False)
        if field.discriminant != q["disc"]:
            raise VerificationError(f"discriminant {field.discriminant} != {q['disc']}")
        unit_norm = int(field.units.fundamental[0].norm()) if q["D"] > 0 else None
        h = _quadratic_class_number(q["disc"], unit_norm)
        object.__setattr__(field, "class_number", h)
        logger.info("field %s: disc=%d h=%d", field.name, field.discriminant, h)
        return field
    if integral_basis is None or units is None or class_num is None:
        raise MathInputError(f"degree {n} fields need integral_basis, units and class_number data")
    return _build(
        g,
        integral_basis,
        units.torsion,
        units.torsion_order,
        units.fundamental,
        int(class_num),
        f"Q[x]/({g})",
        units_in_power_basis=True,
    )


@lru_cache(maxsize=64)
def field_from_string(text: str) -> NumberField:
    """次数 ≤ 2 の体を文字列から作る (同じ文字列には同じ NumberField を返す)。"""
    return make_field(IntPolynomial.parse(text))


# ---------------------------------------------------------------------------
# 埋め込み・境界 (探索範囲の見積り専用)
# ---------------------------------------------------------------------------

def embeddings(field: NumberField, x: FieldElement) -> List[complex]:
    """r1 個の実埋め込み (昇順) と r2 個の複素埋め込みの近似値。"""
    with mpmath.workdps(50):
        roots = mpmath.polyroots(list(reversed(field.poly.coeffs)), maxsteps=200, extraprec=200)
        roots = sorted(roots, key=lambda z: abs(mpmath.im(z)))
        real = sorted(roots[: field.r1], key=lambda z: mpmath.re(z))
        cplx = [z for z in roots[field.r1:] if mpmath.im(z) > 0]
        p = x.power_coeffs()
        out = []
        for z in real:
            out.append(complex(sum(mpmath.mpf(c.numerator) / c.denominator * mpmath.re(z) ** k for k, c in enumerate(p))))
        for z in cplx:
            out.append(complex(sum(mpmath.mpf(c.numerator) / c.denominator * z ** k for k, c in enumerate(p))))
    return out


def minkowski_bound(field: NumberField) -> float:
    n = field.degree
    r2 = field.signature[1]
    return float((4 / mpmath.pi) ** r2 * factorial(n) / mpmath.mpf(n) ** n * mpmath.sqrt(abs(field.discriminant)))


def unit_spread(field: NumberField) -> float:
    """∏ max(|σ(ε)|, 1/|σ(ε)|): 生成元探索の範囲をこれだけ広げれば単数倍で小さい代表に届く。"""
    spread = 1.0
    for eps in field.units.fundamental:
        spread *= max(max(abs(z), 1 / abs(z)) for z in embeddings(field, eps))
    return spread


def unit_image_mod(f):
    """O_K^× の (O_K/f)^× × {±1}^{r1} での像。ideal_arith.unit_image を参照。"""
    from .ideal_arith import unit_image

    return unit_image(f)


__all__ = [
    "NumberField",
    "FieldElement",
    "UnitData",
    "UnitGroup",
    "make_field",
    "field_from_string",
    "norm_trace",
    "is_totally_positive",
    "check_irreducible",
    "pell_unit",
    "class_number",
    "narrow_class_number",
    "narrow_class_number_real",
    "embeddings",
    "minkowski_bound",
    "unit_spread",
    "unit_image_mod",
]
