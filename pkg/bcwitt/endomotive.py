"""有限レベルの代数的エンドモチーフ。

- E_f のスペクトル = DR_f 自身への正則作用 (DRSet)
- レベル間の写像 (射影 π_{f,f'} の同変性)
- K=ℚ の円分レベルでの Hom(∏_{d|n} ℚ(ζ_d), ℚ̄) と DR_(n) の同変全単射
- 交差積の作用素 sigma / mu / mu_star / e を 0-1 行列で構成し、関係式を検証
- Dedekind ゼータ関数の係数 (イデアル数え上げと Euler 積の照合)

交差積の関係式は有限レベルでの再構成であり、次の集合を契約とする:
  sigma(ab) = sigma(a) sigma(b),  mu(ab) = mu(a) mu(b),  sigma(a) = mu(a)^T,
  mu(a) mu_star(a) = e(a),  P = mu_star(a) mu(a) は冪等で mu(a) P = mu(a),
  e(a)^2 = e(a),  rank e(a) = |a·DR_f|,  mu((1)) = sigma((1)) = 1。
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple
import logging

from .core_arith import mat_mul
from .cyclotomic import CyclotomicRing
from .dr_monoid import DRMonoid, Projection, build_dr, dr_project
from .errors import MathInputError, VerificationError
from .ideal_arith import FractionalIdeal, enumerate_ideals, primes_above, principal
from .number_field import NumberField, field_from_string

import sympy

logger = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, ...], ...]

# 同変性を確かめるイデアルのノルム上限
EQUIVARIANCE_NORM_BOUND = 20
GGC_MAX_LEVEL = 30


# ---------------------------------------------------------------------------
# DR 集合
# ---------------------------------------------------------------------------

@dataclass
class DRSet:
    """DR_f が作用する有限集合。action[m][x] は元 m による点 x の行き先。"""

    monoid: DRMonoid
    carrier: Tuple[Hashable, ...]
    action: Tuple[Tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.carrier)

    def act(self, a: FractionalIdeal, x: int) -> int:
        return self.action[self.monoid.classify(a)][x]

    def is_action(self) -> bool:
        M = self.monoid
        e = M.identity
        pts = range(self.size)
        if any(self.action[e][x] != x for x in pts):
            return False
        for i in range(M.size):
            for j in range(M.size):
                ij = M.table[i][j]
                if any(self.action[ij][x] != self.action[i][self.action[j][x]] for x in pts):
                    return False
        return True


def spectrum(f: FractionalIdeal, construction: str = "b", monoid: Optional[DRMonoid] = None) -> DRSet:
    """E_f のスペクトル: DR_f 自身への正則作用。"""
    D = monoid if monoid is not None else build_dr(f, construction)
    return DRSet(D, tuple(range(D.size)), D.table)


@dataclass(frozen=True)
class LevelMap:
    source: DRSet
    target: DRSet
    projection: Projection
    checked: int

    @property
    def mapping(self) -> Tuple[int, ...]:
        return self.projection.mapping

    def to_dict(self) -> Dict:
        d = self.projection.to_dict()
        d["equivariance_checks"] = self.checked
        return d


def level_map(f: FractionalIdeal, f_big: FractionalIdeal, construction: str = "b",
              source: Optional[DRSet] = None, target: Optional[DRSet] = None) -> LevelMap:
    """spectrum(f') → spectrum(f) の同変全射 (f | f')。"""
    src = source or spectrum(f_big, construction)
    tgt = target or spectrum(f, construction)
    proj = dr_project(src.monoid, tgt.monoid)
    checked = 0
    for a in enumerate_ideals(f.field, EQUIVARIANCE_NORM_BOUND):
        ia_src = src.monoid.classify(a)
        ia_tgt = tgt.monoid.classify(a)
        for x in range(src.size):
            if proj(src.action[ia_src][x]) != tgt.action[ia_tgt][proj(x)]:
                raise VerificationError(f"level map is not equivariant for {a} at point {x}")
            checked += 1
    return LevelMap(src, tgt, proj, checked)


# ---------------------------------------------------------------------------
# GGC (K = ℚ)
# ---------------------------------------------------------------------------

def _orbit(act: Dict[int, Tuple[int, ...]], x: int) -> frozenset:
    return frozenset(a_map[x] for a_map in act.values())


def find_equivariant_bijection(
    src: Dict[int, Tuple[int, ...]], dst: Dict[int, Tuple[int, ...]], size: int
) -> Optional[List[int]]:
    """同じ添字 a で作用する 2 つの有限集合の同変全単射を探す。

    軌道の大きさで候補を絞ってから、割り当て→作用で伝播→矛盾なら戻る、の全探索。
    """
    src_orbits = [len(_orbit(src, x)) for x in range(size)]
    dst_orbits = [len(_orbit(dst, y)) for y in range(size)]
    if sorted(src_orbits) != sorted(dst_orbits):
        return None
    order = sorted(range(size), key=lambda x: -src_orbits[x])

    def propagate(beta: List[Optional[int]], x: int, y: int) -> Optional[List[Optional[int]]]:
        beta = list(beta)
        stack = [(x, y)]
        while stack:
            u, v = stack.pop()
            if beta[u] is not None:
                if beta[u] != v:
                    return None
                continue
            if v in beta:
                return None
            beta[u] = v
            for a in src:
                stack.append((src[a][u], dst[a][v]))
        return beta

    def rec(beta: List[Optional[int]]) -> Optional[List[int]]:
        free = [x for x in order if beta[x] is None]
        if not free:
            return list(beta)  # type: ignore[arg-type]
        x = free[0]
        for y in range(size):
            if y in beta or dst_orbits[y] != src_orbits[x]:
                continue
            nxt = propagate(beta, x, y)
            if nxt is not None:
                found = rec(nxt)
                if found is not None:
                    return found
        return None

    return rec([None] * size)


@dataclass(frozen=True)
class GGCResult:
    level: int
    passed: bool
    hom_count: int
    dr_size: int
    witness: Tuple[Tuple[int, int, int], ...]  # (d, j, DR 元の添字): ζ_d ↦ ζ_d^j

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict:
        return {
            "level": self.level,
            "passed": self.passed,
            "hom_count": self.hom_count,
            "dr_size": self.dr_size,
            "bijection": [{"d": d, "j": j, "element": e} for d, j, e in self.witness],
        }


def ggc_check_Q(n: int, monoid: Optional[DRMonoid] = None) -> GGCResult:
    """Hom_ℚ(∏_{d|n} ℚ(ζ_d), ℚ̄) を ℤ[ζ_n] 内の ζ_n^k として実現し、spectrum((n)) と照合する。"""
    if not 1 <= n <= GGC_MAX_LEVEL:
        raise MathInputError(f"level must lie in [1, {GGC_MAX_LEVEL}]")
    ring = CyclotomicRing(n)
    points = [ring.zeta_power(k) for k in range(n)]
    index = {p: k for k, p in enumerate(points)}
    Q = field_from_string("x")
    D = monoid if monoid is not None else build_dr(principal(Q.from_int(n)), "b")
    # ∏_{d|n} ℚ(ζ_d) → ℚ̄ の数は Σ_{d|n} [ℚ(ζ_d) : ℚ]
    homs = int(sum(sympy.totient(d) for d in sympy.divisors(n)))
    if not homs == len(index) == D.size:
        return GGCResult(n, False, homs, D.size, ())
    acting = range(1, 2 * n + 1)
    # Ψ_a の引き戻し: χ(ζ) ↦ χ(ζ)^a
    src = {a: tuple(index[points[k] ** a] for k in range(n)) for a in acting}
    dst = {a: tuple(D.table[D.classify(principal(Q.from_int(a)))][x] for x in range(D.size)) for a in acting}
    beta = find_equivariant_bijection(src, dst, n)
    if beta is None:
        return GGCResult(n, False, homs, D.size, ())
    witness = []
    for k in range(n):
        d = n // sympy.gcd(k, n) if k else 1
        j = (k // (n // d)) % d if d > 1 else 0
        witness.append((int(d), int(j), beta[k]))
    return GGCResult(n, True, homs, D.size, tuple(witness))


# ---------------------------------------------------------------------------
# 交差積の作用素
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelOperator:
    name: str
    ideal: FractionalIdeal
    matrix: Matrix

    @property
    def dim(self) -> int:
        return len(self.matrix)


def _zero(n: int) -> List[List[int]]:
    return [[0] * n for _ in range(n)]


def _freeze(m: Sequence[Sequence[int]]) -> Matrix:
    return tuple(tuple(r) for r in m)


def _identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _rank01_diag(m: Matrix) -> int:
    return sum(m[i][i] for i in range(len(m)))


@dataclass
class CrossedOps:
    monoid: DRMonoid
    ideals: Tuple[FractionalIdeal, ...]
    sigma: Dict[FractionalIdeal, LevelOperator] = dc_field(default_factory=dict)
    mu: Dict[FractionalIdeal, LevelOperator] = dc_field(default_factory=dict)
    mu_star: Dict[FractionalIdeal, LevelOperator] = dc_field(default_factory=dict)
    e: Dict[FractionalIdeal, LevelOperator] = dc_field(default_factory=dict)


def crossed_ops(D: DRMonoid, ideals: Optional[Sequence[FractionalIdeal]] = None, norm_bound: int = 10) -> CrossedOps:
    """各イデアル a について sigma(a), mu(a), mu_star(a), e(a) を作る。"""
    if ideals is None:
        ideals = enumerate_ideals(D.field, norm_bound)
    n = D.size
    ops = CrossedOps(D, tuple(ideals))
    for a in ideals:
        m = D.classify(a)
        image = {D.table[m][x] for x in range(n)}
        section = {y: min(x for x in range(n) if D.table[m][x] == y) for y in image}
        sig, mu, mus, e = _zero(n), _zero(n), _zero(n), _zero(n)
        for x in range(n):
            y = D.table[m][x]
            sig[x][y] = 1
            mu[y][x] = 1
        for y, x in section.items():
            mus[x][y] = 1
            e[y][y] = 1
        ops.sigma[a] = LevelOperator("sigma", a, _freeze(sig))
        ops.mu[a] = LevelOperator("mu", a, _freeze(mu))
        ops.mu_star[a] = LevelOperator("mu_star", a, _freeze(mus))
        ops.e[a] = LevelOperator("e", a, _freeze(e))
    return ops


@dataclass(frozen=True)
class RelationCheck:
    relation: str
    ideals: Tuple[str, ...]
    passed: bool

    def to_dict(self) -> Dict:
        return {"relation": self.relation, "ideals": list(self.ideals), "passed": self.passed}


def _mm(a: Matrix, b: Matrix) -> Matrix:
    return _freeze(mat_mul(a, b))


def _transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def verify_relations(ops: CrossedOps) -> List[RelationCheck]:
    """交差積の関係式をすべて行列の等式として確かめる。"""
    D = ops.monoid
    n = D.size
    ident = _identity(n)
    checks: List[RelationCheck] = []

    def record(name: str, ideals: Sequence[FractionalIdeal], ok: bool) -> None:
        checks.append(RelationCheck(name, tuple(str(i) for i in ideals), bool(ok)))

    for a in ops.ideals:
        sig, mu, mus, e = (ops.sigma[a].matrix, ops.mu[a].matrix, ops.mu_star[a].matrix, ops.e[a].matrix)
        proj = _mm(mus, mu)
        m = D.classify(a)
        record("mu_mu_star_is_e", [a], _mm(mu, mus) == e)
        record("mu_star_mu_idempotent", [a], _mm(proj, proj) == proj)
        record("mu_absorbs_domain_projector", [a], _mm(mu, proj) == mu)
        record("sigma_is_mu_transpose", [a], _transpose(mu) == sig)
        record("e_idempotent", [a], _mm(e, e) == e)
        record("e_rank", [a], _rank01_diag(e) == len({D.table[m][x] for x in range(n)}))
        if m == D.identity:
            record("unit_acts_trivially", [a], mu == ident and sig == ident)
    for a in ops.ideals:
        for b in ops.ideals:
            ab = D.table[D.classify(a)][D.classify(b)]
            # sigma/mu は類にしか依存しないので ab の代表として任意の既存イデアルを使える
            c = next((x for x in ops.ideals if D.classify(x) == ab), None)
            if c is None:
                continue
            record("sigma_multiplicative", [a, b], _mm(ops.sigma[a].matrix, ops.sigma[b].matrix) == ops.sigma[c].matrix)
            record("mu_multiplicative", [a, b], _mm(ops.mu[a].matrix, ops.mu[b].matrix) == ops.mu[c].matrix)
    return checks


# ---------------------------------------------------------------------------
# ゼータ係数
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZetaResult:
    bound: int
    coefficients: Tuple[int, ...]  # a(1), ..., a(B)
    euler_agrees: Optional[bool]
    reference_agrees: Optional[bool] = None  # 次数 ≤ 2 の指標和との一致。次数 3 以上は None

    def a(self, n: int) -> int:
        return self.coefficients[n - 1]

    def to_dict(self) -> Dict:
        return {
            "bound": self.bound,
            "coefficients": list(self.coefficients),
            "euler_agrees": self.euler_agrees,
            "reference_agrees": self.reference_agrees,
        }


def kronecker(D: int, n: int) -> int:
    """Kronecker 記号 (D/n) (n ≥ 1)。"""
    if n < 1:
        raise MathInputError("n must be >= 1")
    sign = 1
    while n % 2 == 0:
        if D % 2 == 0:
            return 0
        n //= 2
        sign *= 1 if D % 8 in (1, 7) else -1
    if n == 1:
        return sign
    return sign * int(sympy.jacobi_symbol(D % n, n))


def reference_coefficients(field: NumberField, bound: int) -> Optional[List[int]]:
    """イデアルを数えずに求めた a(1..bound)。ℚ は 1、二次体は Σ_{d|n} (d_K/d)。"""
    if field.degree == 1:
        return [1] * bound
    if field.degree == 2:
        D = field.discriminant
        return [sum(kronecker(D, int(d)) for d in sympy.divisors(n)) for n in range(1, bound + 1)]
    return None


def euler_product_coefficients(field: NumberField, bound: int) -> List[int]:
    """∏_P (1 - N(P)^{-s})^{-1} の Dirichlet 係数 (n ≤ bound)。"""
    series = [0] * (bound + 1)
    series[1] = 1
    for p in sympy.primerange(2, bound + 1):
        for P in primes_above(field, int(p)):
            q = P.norm
            if q > bound:
                continue
            out = [0] * (bound + 1)
            for k in range(1, bound + 1):
                if series[k]:
                    m = k
                    while m <= bound:
                        out[m] += series[k]
                        m *= q
            series = out
    return series[1:]


def zeta_coefficients(field: NumberField, bound: int, euler_check: bool = True) -> ZetaResult:
    """a(n) = #{ノルム n の整イデアル}。"""
    if bound < 1:
        raise MathInputError("bound must be >= 1")
    counts = [0] * bound
    for a in enumerate_ideals(field, bound):
        counts[int(a.norm()) - 1] += 1
    agrees = reference = None
    if euler_check:
        agrees = euler_product_coefficients(field, bound) == counts
        if not agrees:
            logger.info("zeta coefficients disagree with the Euler product up to %d", bound)
        expected = reference_coefficients(field, bound)
        if expected is not None:
            reference = expected == counts
            if not reference:
                logger.info("zeta coefficients disagree with the character sum up to %d", bound)
    return ZetaResult(bound, tuple(counts), agrees, reference)


__all__ = [
    "DRSet",
    "LevelMap",
    "GGCResult",
    "LevelOperator",
    "CrossedOps",
    "RelationCheck",
    "ZetaResult",
    "spectrum",
    "level_map",
    "find_equivariant_bijection",
    "ggc_check_Q",
    "crossed_ops",
    "verify_relations",
    "kronecker",
    "reference_coefficients",
    "euler_product_coefficients",
    "zeta_coefficients",
]
