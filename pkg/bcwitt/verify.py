"""受け入れ基準 1〜10 をまとめて実行するランナー。

各基準は独立な関数で、乱数は (seed, 基準番号) だけから決まる。
jobs > 1 ならスレッドで並列に走らせ、結果は基準番号順に並べ直す。
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterable, List, Sequence, Tuple
import logging
import random
import time

from .cyclotomic import cyclotomic_frobenius_check
from .dr_monoid import build_dr, dr_project, dr_quotient, dr_size
from .endomotive import crossed_ops, ggc_check_Q, verify_relations, zeta_coefficients
from .errors import BCWittError
from .ideal_arith import FractionalIdeal, divisors_of, parse_ideal
from .number_field import NumberField, field_from_string
from .ray_class import ray_class_group, ray_class_number
from .witt import (
    GhostVector,
    TruncationSet,
    dwork_member,
    frobenius,
    frobenius_congruence,
    ghost,
    is_periodic,
    periodic_rank,
    random_periodic,
    random_witt,
    rational_dr_classifier,
    scalar_mul,
    teichmuller,
    unghost,
    verschiebung,
    witt_add,
    witt_mul,
    witt_neg,
)

import sympy

logger = logging.getLogger(__name__)

# (体の多項式, 法の生成元, 期待する |DR_f|)
TEST_MATRIX: Tuple[Tuple[str, str, int], ...] = (
    ("x", "4", 4),
    ("x", "6", 6),
    ("x", "12", 12),
    ("x^2+1", "2", 3),
    ("x^2+1", "2+t", 2),
    ("x^2+1", "3", 3),
    ("x^2+5", "2", 8),
    ("x^2+5", "3", 10),
    ("x^2-3", "2", 6),
)
REDUCED_MATRIX = TEST_MATRIX[:2] + TEST_MATRIX[3:5] + TEST_MATRIX[6:7]


@dataclass(frozen=True)
class SuiteOptions:
    seed: int = 0
    reduced: bool = False


@dataclass
class CriterionResult:
    criterion: int
    name: str
    passed: bool
    detail: Dict = dc_field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> Dict:
        # 実行時間は出力に含めない (同じ seed なら同じ JSON)
        return {"criterion": self.criterion, "name": self.name, "passed": self.passed, "detail": self.detail}


def _modulus(poly: str, gens: str) -> FractionalIdeal:
    return parse_ideal(field_from_string(poly), gens)


def _matrix(opts: SuiteOptions) -> Sequence[Tuple[str, str, int]]:
    return REDUCED_MATRIX if opts.reduced else TEST_MATRIX


def _case(poly: str, gens: str) -> str:
    return f"{poly} ({gens})"


# ---------------------------------------------------------------------------
# 基準
# ---------------------------------------------------------------------------

def check_rational_residues(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    """DR_(n)(ℚ) ≅ (ℤ/n, ·) via [(m)] ↦ m mod n。"""
    top = 8 if opts.reduced else 24
    failures = []
    for n in range(1, top + 1):
        D = dr_quotient(_modulus("x", str(n)))
        phi = [int(e.representative.norm()) % n for e in D.elements]
        ok = sorted(phi) == list(range(n)) and all(
            phi[D.table[i][j]] == phi[i] * phi[j] % n for i in range(D.size) for j in range(D.size)
        )
        if not ok:
            failures.append(n)
    return not failures, {"levels": top, "failures": failures}


def check_constructions_agree(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    cases = {}
    passed = True
    for poly, gens, expected in _matrix(opts):
        f = _modulus(poly, gens)
        a = build_dr(f, "a")
        b = build_dr(f, "b")
        c = build_dr(f, "c")
        ok = a.size == b.size == c.size == expected
        cases[_case(poly, gens)] = {
            "size": a.size,
            "a_to_b": a.isomorphism_to(b),
            "a_to_c": a.isomorphism_to(c),
            "convention": c.convention,
        }
        passed &= ok
    return passed, cases


def check_cardinality(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    cases = {}
    passed = True
    for poly, gens, expected in _matrix(opts):
        f = _modulus(poly, gens)
        terms = []
        for d in divisors_of(f):
            h = ray_class_group(d).order
            ok = h == ray_class_number(d)
            passed &= ok
            terms.append(h)
        total = sum(terms)
        passed &= total == dr_size(f) == expected
        cases[_case(poly, gens)] = {"terms": terms, "total": total}
    return passed, cases


def check_projection_chains(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    chains = [("x", ("2", "6", "12")), ("x^2+1", ("1+t", "2", "2+2*t"))]
    detail = {}
    passed = True
    for poly, levels in chains:
        small, mid, big = (build_dr(_modulus(poly, g), "b") for g in levels)
        p_mid = dr_project(mid, small)
        p_big = dr_project(big, mid)
        direct = dr_project(big, small)
        ok = p_mid.compose(p_big).mapping == direct.mapping
        passed &= ok
        detail[poly] = {"chain": list(levels), "composes": ok}
    return passed, detail


def check_witt_laws(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    S = TruncationSet.divisors(24)
    samples = 10 if opts.reduced else 100
    xs = [random_witt(S, rng) for _ in range(samples)]
    roundtrip = all(unghost(ghost(x)) == x for x in xs)
    accepted = sum(dwork_member(ghost(x)) for x in xs)
    w = ghost(xs[0])
    perturbed = [GhostVector(w.ring, S, tuple(v + (1 if k == i else 0) for k, v in enumerate(w.comps))) for i in range(1, len(S))]
    perturbed.append(GhostVector(w.ring, S, (w.comps[0] + Fraction(1, 2),) + w.comps[1:]))
    rejected = sum(not dwork_member(p) for p in perturbed)
    fv = all(frobenius(m, verschiebung(m, x)) == scalar_mul(m, x) for m in (2, 3) for x in xs[:5])
    teich = all(
        witt_mul(teichmuller(a, S), teichmuller(b, S)) == teichmuller(a * b, S)
        for a, b in ((rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(5))
    )
    congr = all(frobenius_congruence(x, p) for p in (2, 3) for x in xs[:10])
    detail = {
        "roundtrip": roundtrip,
        "accepted": f"{accepted}/{samples}",
        "rejected": f"{rejected}/{len(perturbed)}",
        "FV": fv,
        "teichmuller": teich,
        "frobenius_congruence": congr,
    }
    ok = roundtrip and accepted == samples and rejected == len(perturbed) and fv and teich and congr
    return ok, detail


def check_cyclotomic_lifts(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    top = 6 if opts.reduced else 20
    trials = 3 if opts.reduced else 20
    failures = []
    checked = 0
    for m in range(1, top + 1):
        for p in sympy.primerange(2, 14):
            if m % p == 0:
                continue
            checked += 1
            if not cyclotomic_frobenius_check(m, int(p), trials, rng):
                failures.append([m, int(p)])
    return not failures, {"pairs": checked, "failures": failures}


def check_periodicity(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    pairs = 5 if opts.reduced else 50
    levels = (2, 3) if opts.reduced else (2, 3, 4, 6)
    detail: Dict = {}
    passed = True
    for N in levels:
        S = TruncationSet.divisors(2 * N)
        classify = rational_dr_classifier(N)
        ok = True
        for _ in range(pairs):
            x, y = random_periodic(S, N, rng), random_periodic(S, N, rng)
            ok &= all(is_periodic(z, N, classify).periodic for z in (witt_add(x, y), witt_mul(x, y), witt_neg(x)))
        detail[f"N={N}"] = ok
        passed &= ok
    ranks = {}
    for poly, gens, expected in _matrix(opts):
        cert = periodic_rank(_modulus(poly, gens))
        ranks[_case(poly, gens)] = cert.rank
        passed &= cert.rank == expected
    detail["ranks"] = ranks
    return passed, detail


def check_ggc(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    levels = (1, 2, 3, 4, 6) if opts.reduced else (1, 2, 3, 4, 6, 8, 12)
    results = {str(n): ggc_check_Q(n) for n in levels}
    return all(results.values()), {n: r.to_dict() for n, r in results.items()}


def check_endomotive(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    detail = {}
    passed = True
    for poly, gens in (("x", "6"), ("x^2+1", "2")):
        checks = verify_relations(crossed_ops(build_dr(_modulus(poly, gens), "b"), norm_bound=10))
        bad = [c.to_dict() for c in checks if not c.passed]
        detail[_case(poly, gens)] = {"checked": len(checks), "failed": bad}
        passed &= not bad
    return passed, detail


def _chi4_sum(n: int) -> int:
    return sum({1: 1, 3: -1}.get(d % 4, 0) for d in sympy.divisors(n))


def check_zeta(opts: SuiteOptions, rng: random.Random) -> Tuple[bool, Dict]:
    B1 = 50 if opts.reduced else 500
    B2 = 40 if opts.reduced else 200
    zi = zeta_coefficients(field_from_string("x^2+1"), B1, euler_check=False)
    mismatch = [n for n in range(1, B1 + 1) if zi.a(n) != _chi4_sum(n)]
    z5 = zeta_coefficients(field_from_string("x^2+5"), B2)
    mult = all(
        z5.a(m * n) == z5.a(m) * z5.a(n)
        for m in range(1, B2 + 1)
        for n in range(1, B2 // m + 1)
        if gcd(m, n) == 1
    )
    ok = not mismatch and bool(z5.euler_agrees) and bool(z5.reference_agrees) and mult
    return ok, {"gaussian_bound": B1, "gaussian_mismatch": mismatch, "euler_bound": B2, "euler_agrees": z5.euler_agrees, "reference_agrees": z5.reference_agrees, "multiplicative": mult}


CRITERIA: Dict[int, Tuple[str, Callable[[SuiteOptions, random.Random], Tuple[bool, Dict]]]] = {
    1: ("dr-residue-isomorphism", check_rational_residues),
    2: ("triple-construction", check_constructions_agree),
    3: ("cardinality-law", check_cardinality),
    4: ("projection-coherence", check_projection_chains),
    5: ("witt-ring-laws", check_witt_laws),
    6: ("frobenius-lift", check_cyclotomic_lifts),
    7: ("periodicity-rank", check_periodicity),
    8: ("ggc", check_ggc),
    9: ("endomotive-relations", check_endomotive),
    10: ("zeta-counting", check_zeta),
}


def parse_suite(suite: str) -> List[int]:
    """`all` または `1,3,5-7`。"""
    if suite.strip() == "all":
        return sorted(CRITERIA)
    out = set()
    for part in suite.split(","):
        part = part.strip()
        if not part:
            continue
        lo, _, hi = part.partition("-")
        try:
            rng = range(int(lo), int(hi or lo) + 1)
        except ValueError:
            raise ValueError(f"invalid suite selector: {part!r}")
        for k in rng:
            if k not in CRITERIA:
                raise ValueError(f"unknown criterion {k}")
            out.add(k)
    return sorted(out)


def run_criterion(k: int, opts: SuiteOptions) -> CriterionResult:
    name, fn = CRITERIA[k]
    rng = random.Random(opts.seed * 1000 + k)
    t0 = time.perf_counter()
    try:
        passed, detail = fn(opts, rng)
    except BCWittError as e:
        passed, detail = False, {"error": f"{type(e).__name__}: {e}"}
    seconds = time.perf_counter() - t0
    logger.info("criterion %d (%s): %s in %.2fs", k, name, "ok" if passed else "FAILED", seconds)
    return CriterionResult(k, name, bool(passed), detail, seconds)


def _warm_fields(polys: Iterable[str]) -> List[NumberField]:
    # 体はキャッシュの同一性が前提なので並列実行前に作っておく
    return [field_from_string(p) for p in polys]


def run_suite(criteria: Sequence[int], seed: int = 0, jobs: int = 1, reduced: bool = False) -> List[CriterionResult]:
    opts = SuiteOptions(seed=seed, reduced=reduced)
    _warm_fields(sorted({p for p, _g, _n in TEST_MATRIX}))
    results: List[CriterionResult] = []
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            futs = {ex.submit(run_criterion, k, opts): k for k in criteria}
            for fut in as_completed(futs):
                results.append(fut.result())
    else:
        for k in criteria:
            results.append(run_criterion(k, opts))
    results.sort(key=lambda r: r.criterion)
    return results


__all__ = [
    "TEST_MATRIX",
    "CRITERIA",
    "SuiteOptions",
    "CriterionResult",
    "parse_suite",
    "run_criterion",
    "run_suite",
]
