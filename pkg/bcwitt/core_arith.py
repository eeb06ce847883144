"""整数/有理数の線形代数と多項式、有限アーベル群の構造。

他の全モジュールの土台:
- 行型 Hermite 標準形 (上三角, 正のピボット, ピボット上の成分は [0, pivot) に簡約)
- 変換行列つき Smith 標準形
- 実根での符号判定 (有理端点の区間を細分するだけで浮動小数点は使わない)
- 関係式/乗積表からの有限アーベル群 (不変因子形と離散対数)

値はすべて不変で、関数は純粋。
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from tokenize import TokenError
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple
import itertools

import sympy
from sympy import Poly, Symbol
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication,
    parse_expr,
    standard_transformations,
)

from .errors import InfiniteGroupError, MathInputError

IntMatrix = List[List[int]]
RatMatrix = List[List[Fraction]]

_X = Symbol("x")
_TRANSFORMS = standard_transformations + (implicit_multiplication, convert_xor)


def parse_expression(text: str, var: str):
    """`2x^2-3x+1` のような暗黙の積と ^ を許して var の式として読む。"""
    return parse_expr(text, local_dict={var: Symbol(var)}, transformations=_TRANSFORMS)


# ---------------------------------------------------------------------------
# 多項式
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntPolynomial:
    """整数係数多項式。係数は定数項から昇順、末尾の 0 は持たない。"""

    coeffs: Tuple[int, ...]

    def __init__(self, coeffs: Iterable[int]):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_sympy(cls, poly: Poly) -> "IntPolynomial":
        return cls(reversed([int(c) for c in poly.all_coeffs()]))

    @classmethod
    def parse(cls, text: str, var: str = "x") -> "IntPolynomial":
        """`x^2+1` のような文字列を読む。整数係数でなければ MathInputError。"""
        sym = Symbol(var)
        try:
            expr = parse_expression(text, var)
            poly = Poly(expr, sym)
        except (SyntaxError, TokenError, sympy.SympifyError, sympy.polys.polyerrors.BasePolynomialError, TypeError) as e:
            raise MathInputError(f"cannot parse polynomial {text!r}: {e}") from e
        if not all(c.is_integer for c in poly.all_coeffs()):
            raise MathInputError(f"polynomial {text!r} must have integer coefficients")
        return cls.from_sympy(poly)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_sympy(self, var: Symbol = _X) -> Poly:
        return Poly(list(reversed(self.coeffs)) or [0], var, domain="ZZ")

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPolynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(-c for c in self.coeffs)

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    def divmod_monic(self, divisor: "IntPolynomial") -> Tuple["IntPolynomial", "IntPolynomial"]:
        """モニック多項式による割り算 (整数係数のまま閉じる)。"""
        if divisor.leading != 1:
            raise MathInputError("divisor must be monic")
        rem = list(self.coeffs)
        d = divisor.degree
        quot = [0] * max(len(rem) - d, 0)
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k]
            if c:
                quot[k - d] = c
                for i, b in enumerate(divisor.coeffs):
                    rem[k - d + i] -= c * b
        return IntPolynomial(quot), IntPolynomial(rem[:d])

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return str(self.to_sympy().as_expr()).replace("**", "^")


# ---------------------------------------------------------------------------
# 整数行列: HNF / SNF
# ---------------------------------------------------------------------------

def identity_matrix(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def hnf(m: Sequence[Sequence[int]]) -> IntMatrix:
    """行型 Hermite 標準形。零行は落とす。

    >>> hnf([[2, 0], [1, 1]])
    [[1, 1], [0, 2]]
    """
    rows = [list(map(int, r)) for r in m if any(r)]
    if not rows:
        return []
    ncols = len(rows[0])
    k = 0
    for col in range(ncols):
        if k >= len(rows):
            break
        # ユークリッドの互除法で col 列を k 行目以外 0 にする
        while True:
            nz = [i for i in range(k, len(rows)) if rows[i][col] != 0]
            if not nz:
                break
            i_min = min(nz, key=lambda i: abs(rows[i][col]))
            rows[k], rows[i_min] = rows[i_min], rows[k]
            piv = rows[k][col]
            clean = True
            for i in range(k + 1, len(rows)):
                q = rows[i][col] // piv
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[k])]
                if rows[i][col] != 0:
                    clean = False
            if clean:
                break
        if rows[k][col] == 0:
            continue
        if rows[k][col] < 0:
            rows[k] = [-a for a in rows[k]]
        piv = rows[k][col]
        for i in range(k):
            q = rows[i][col] // piv
            if q:
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[k])]
        k += 1
    return rows[:k]


def lattice_coordinates(h: Sequence[Sequence[int]], v: Sequence[int]) -> Optional[List[int]]:
    """HNF 格子 h の中で v = c·h となる整数 c を返す。格子外なら None。"""
    rest = list(v)
    coords: List[int] = []
    for row in h:
        col = next(j for j, a in enumerate(row) if a != 0)
        q, r = divmod(rest[col], row[col])
        if r:
            return None
        coords.append(q)
        if q:
            rest = [a - q * b for a, b in zip(rest, row)]
    if any(rest):
        return None
    return coords


def snf(m: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith 標準形 D = U·M·V (U, V はユニモジュラ, d_i | d_{i+1})。"""
    a = [list(map(int, r)) for r in m]
    nr = len(a)
    nc = len(a[0]) if nr else 0
    u = identity_matrix(nr)
    v = identity_matrix(nc)

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst: int, src: int, q: int) -> None:
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst: int, src: int, q: int) -> None:
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    for t in range(min(nr, nc)):
        entries = [(abs(a[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if a[i][j]]
        if not entries:
            break
        _, i0, j0 = min(entries)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            piv = a[t][t]
            for i in range(t + 1, nr):
                q = a[i][t] // piv
                if q:
                    add_row(i, t, -q)
            for j in range(t + 1, nc):
                q = a[t][j] // piv
                if q:
                    add_col(j, t, -q)
            rest = [(abs(a[i][t]), i, "r") for i in range(t + 1, nr) if a[i][t]]
            rest += [(abs(a[t][j]), j, "c") for j in range(t + 1, nc) if a[t][j]]
            if rest:
                # 余りが残った: 最小の成分をピボットへ
                _, idx, kind = min(rest)
                if kind == "r":
                    swap_rows(t, idx)
                else:
                    swap_cols(t, idx)
                continue
            bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % piv), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return a, u, v


# ---------------------------------------------------------------------------
# 有理数行列
# ---------------------------------------------------------------------------

def _as_fractions(m: Sequence[Sequence]) -> RatMatrix:
    return [[Fraction(x) for x in row] for row in m]


def rational_det(m: Sequence[Sequence]) -> Fraction:
    a = _as_fractions(m)
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def rational_inverse(m: Sequence[Sequence]) -> RatMatrix:
    n = len(m)
    a = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(_as_fractions(m))]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise MathInputError("matrix is singular")
        a[c], a[p] = a[p], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def int_det(m: Sequence[Sequence[int]]) -> int:
    """整数行列式 (Bareiss の分数なし消去)。"""
    a = [list(map(int, r)) for r in m]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def common_denominator(values: Iterable[Fraction]) -> int:
    return reduce(lambda acc, x: acc * x.denominator // gcd(acc, x.denominator), values, 1)


# ---------------------------------------------------------------------------
# 実根での符号
# ---------------------------------------------------------------------------

def _sign(x) -> int:
    x = sympy.Rational(x)
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def real_root_signs(g: IntPolynomial, a: IntPolynomial) -> Tuple[int, ...]:
    """g の実根 θ_1 < θ_2 < ... での a(θ_i) の符号 (+1 / -1 / 0)。

    sympy の孤立区間 (Sturm 列による数え上げ) を a の符号が一定になるまで細分する。
    """
    G = g.to_sympy()
    if G.degree() > 0 and sympy.gcd(G, G.diff(_X)).degree() > 0:
        raise MathInputError(f"{g} is not squarefree")
    A = a.to_sympy()
    common = sympy.gcd(G, A)
    signs: List[int] = []
    for (s, t), _mult in G.intervals():
        if s == t:
            signs.append(_sign(A.eval(s)))
            continue
        while True:
            if common.degree() > 0 and common.count_roots(s, t) > 0:
                signs.append(0)
                break
            if A.degree() <= 0 or A.count_roots(s, t) == 0:
                signs.append(_sign(A.eval((s + t) / 2)))
                break
            s, t = G.refine_root(s, t, steps=1)
    return tuple(signs)


# ---------------------------------------------------------------------------
# 素数判定
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    """sympy.isprime: 2^64 未満は決定的, それ以上は BPSW (反例未知, 誤り確率 < 2^-128 と扱う)。"""
    return bool(sympy.isprime(n))


def prime_factors(n: int) -> Dict[int, int]:
    return {int(p): int(e) for p, e in sympy.factorint(abs(n)).items()}


# ---------------------------------------------------------------------------
# 有限アーベル群
# ---------------------------------------------------------------------------

Element = Tuple[int, ...]


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """ℤ/d_1 × ... × ℤ/d_k (d_1 | d_2 | ... , d_i ≥ 2)。元は指数ベクトル。"""

    invariants: Tuple[int, ...]

    def __post_init__(self):
        for d in self.invariants:
            if d < 2:
                raise MathInputError(f"invariant factor {d} must be >= 2")
        for d, e in zip(self.invariants, self.invariants[1:]):
            if e % d:
                raise MathInputError(f"invariant factors {self.invariants} do not form a divisibility chain")

    @property
    def order(self) -> int:
        return reduce(lambda x, y: x * y, self.invariants, 1)

    @property
    def exponent(self) -> int:
        return self.invariants[-1] if self.invariants else 1

    @property
    def identity(self) -> Element:
        return (0,) * len(self.invariants)

    def reduce(self, vec: Sequence[int]) -> Element:
        return tuple(int(x) % d for x, d in zip(vec, self.invariants))

    def add(self, x: Element, y: Element) -> Element:
        return self.reduce([a + b for a, b in zip(x, y)])

    def neg(self, x: Element) -> Element:
        return self.reduce([-a for a in x])

    def scale(self, x: Element, k: int) -> Element:
        return self.reduce([k * a for a in x])

    def elements(self) -> Iterator[Element]:
        return itertools.product(*(range(d) for d in self.invariants))

    def element_order(self, x: Element) -> int:
        o = 1
        for a, d in zip(x, self.invariants):
            k = d // gcd(a, d)
            o = o * k // gcd(o, k)
        return o


@dataclass(frozen=True)
class QuotientMap:
    """ℤ^n → G。元の生成元の指数ベクトルを G の元へ送る。"""

    group: FiniteAbelianGroup
    transform: Tuple[Tuple[int, ...], ...]  # n × k

    def __call__(self, vec: Sequence[int]) -> Element:
        if not self.group.invariants:
            return ()
        return self.group.reduce([sum(v * row[j] for v, row in zip(vec, self.transform)) for j in range(len(self.group.invariants))])

    def generator_images(self) -> List[Element]:
        return [self(tuple(int(i == j) for j in range(len(self.transform)))) for i in range(len(self.transform))]


def group_from_relations(num_generators: int, relations: Sequence[Sequence[int]]) -> QuotientMap:
    """ℤ^n / (relations の行空間) を不変因子形で返す。無限なら InfiniteGroupError。"""
    n = num_generators
    if n == 0:
        return QuotientMap(FiniteAbelianGroup(()), ())
    rows = [list(r) for r in relations if any(r)]
    if not rows:
        raise InfiniteGroupError(n)
    d, _u, v = snf(rows)
    diag = [abs(d[i][i]) if i < len(d) else 0 for i in range(n)]
    free = sum(1 for x in diag if x == 0)
    if free:
        raise InfiniteGroupError(free)
    kept = [j for j in range(n) if diag[j] > 1]
    group = FiniteAbelianGroup(tuple(diag[j] for j in kept))
    transform = tuple(tuple(v[i][j] for j in kept) for i in range(n))
    return QuotientMap(group, transform)


def group_from_table(
    elements: Sequence[Hashable],
    mul: Callable[[Hashable, Hashable], Hashable],
    identity: Hashable,
) -> Tuple[FiniteAbelianGroup, Dict[Hashable, Element]]:
    """乗法で閉じた有限可換群の元の一覧から (構造, 離散対数表) を作る。

    部分群を1元ずつ拡大し、各段で「g^m ∈ H となる最小の m」の関係式を集める。
    """
    gens: List[Hashable] = []
    relations: List[List[int]] = []
    sub: Dict[Hashable, Tuple[int, ...]] = {identity: ()}
    for g in elements:
        if g in sub:
            continue
        x, m = g, 1
        while x not in sub:
            x = mul(x, g)
            m += 1
        relations = [r + [0] for r in relations]
        relations.append([-e for e in sub[x]] + [m])
        gens.append(g)
        grown: Dict[Hashable, Tuple[int, ...]] = {}
        for h, vec in sub.items():
            y = h
            for j in range(m):
                grown[y] = vec + (j,)
                y = mul(y, g)
        sub = grown
    if len(sub) != len(set(elements)):
        raise MathInputError("table is not closed under multiplication")
    qmap = group_from_relations(len(gens), relations)
    return qmap.group, {e: qmap(vec) for e, vec in sub.items()}


__all__ = [
    "IntMatrix",
    "IntPolynomial",
    "parse_expression",
    "FiniteAbelianGroup",
    "QuotientMap",
    "hnf",
    "snf",
    "lattice_coordinates",
    "rational_det",
    "int_det",
    "rational_inverse",
    "common_denominator",
    "real_root_signs",
    "is_prime",
    "prime_factors",
    "group_from_relations",
    "group_from_table",
    "identity_matrix",
    "mat_mul",
]
