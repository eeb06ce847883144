"""円分整数環 ℤ[ζ_m] = ℤ[x]/(Φ_m) とその Frobenius 持ち上げ σ_p: ζ ↦ ζ^p。

係数は Fraction で持つ (Witt ベクトルの unghost で n による除算が出るため)。
整元かどうかは is_integral で判定する。
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, List, Sequence, Tuple
import random

import sympy

from .core_arith import IntPolynomial
from .errors import MathInputError


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m: int) -> IntPolynomial:
    """Φ_m = (x^m - 1) / ∏_{d|m, d<m} Φ_d。"""
    if m < 1:
        raise MathInputError("cyclotomic level must be >= 1")
    poly = IntPolynomial([-1] + [0] * (m - 1) + [1])
    for d in range(1, m):
        if m % d == 0:
            poly, rem = poly.divmod_monic(cyclotomic_polynomial(d))
            if not rem.is_zero():
                raise MathInputError(f"x^{m}-1 is not divisible by Phi_{d}")
    return poly


@dataclass(frozen=True)
class CyclotomicElement:
    ring: "CyclotomicRing"
    coeffs: Tuple[Fraction, ...]

    def _coerce(self, other) -> "CyclotomicElement":
        if isinstance(other, CyclotomicElement):
            if other.ring != self.ring:
                raise MathInputError("elements of different cyclotomic rings")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.from_int(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicElement(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicElement(self.ring, tuple(-a for a in self.coeffs))

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
        prod = [Fraction(0)] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[i + j] += a * b
        return self.ring.reduce(prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise MathInputError("negative powers are not supported in Z[zeta]")
        result = self.ring.one
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, k):
        if not isinstance(k, (int, Fraction)) or k == 0:
            raise MathInputError("can only divide by a nonzero rational")
        return CyclotomicElement(self.ring, tuple(a / k for a in self.coeffs))

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(str(c) if k == 0 else f"{c}*z^{k}")
        return "+".join(terms).replace("+-", "-") if terms else "0"


@dataclass(frozen=True)
class CyclotomicRing:
    level: int

    def __post_init__(self):
        if self.level < 1:
            raise MathInputError("cyclotomic level must be >= 1")

    integral = True

    @property
    def name(self) -> str:
        return f"Z[zeta_{self.level}]"

    @property
    def modulus_poly(self) -> IntPolynomial:
        return cyclotomic_polynomial(self.level)

    @property
    def degree(self) -> int:
        return self.modulus_poly.degree

    def reduce(self, coeffs: Sequence) -> CyclotomicElement:
        p = [Fraction(c) for c in coeffs]
        phi = self.modulus_poly.coeffs
        n = self.degree
        for k in range(len(p) - 1, n - 1, -1):
            c = p[k]
            if c:
                for i in range(n):
                    p[k - n + i] -= c * phi[i]
                p[k] = Fraction(0)
        p = (p + [Fraction(0)] * n)[:n]
        return CyclotomicElement(self, tuple(p))

    def element(self, coeffs: Iterable) -> CyclotomicElement:
        return self.reduce(list(coeffs))

    def from_int(self, k) -> CyclotomicElement:
        return self.reduce([k])

    @property
    def zero(self) -> CyclotomicElement:
        return self.reduce([0])

    @property
    def one(self) -> CyclotomicElement:
        return self.reduce([1])

    @property
    def zeta(self) -> CyclotomicElement:
        return self.reduce([0, 1])

    def zeta_power(self, k: int) -> CyclotomicElement:
        return self.reduce([0] * (k % self.level) + [1])

    def basis(self) -> List[CyclotomicElement]:
        return [self.reduce([0] * i + [1]) for i in range(self.degree)]

    # --- 係数環インターフェース (witt から使う) ---
    def coerce(self, v) -> CyclotomicElement:
        if isinstance(v, CyclotomicElement):
            return v
        if isinstance(v, (list, tuple)):
            return self.element(Fraction(c) for c in v)
        return self.from_int(Fraction(v))

    def is_integral(self, v: CyclotomicElement) -> bool:
        return v.is_integral()

    def divisible(self, v: CyclotomicElement, q: int) -> bool:
        return all((c / q).denominator == 1 for c in v.coeffs)

    def frobenius(self, p: int, v: CyclotomicElement) -> CyclotomicElement:
        """σ_p(v): ζ ↦ ζ^p。p と m が互いに素でなければ MathInputError。"""
        if gcd(p, self.level) != 1:
            raise MathInputError(f"no Frobenius lift at p={p} on {self.name}")
        out = [Fraction(0)] * self.level
        for i, c in enumerate(v.coeffs):
            if c:
                out[(i * p) % self.level] += c
        return self.reduce(out)

    def has_lift(self, p: int) -> bool:
        return gcd(p, self.level) == 1

    def to_json(self, v: CyclotomicElement) -> List[str]:
        return [str(c) for c in v.coeffs]

    def random_element(self, rng: random.Random, lo: int = -5, hi: int = 5) -> CyclotomicElement:
        return self.element(rng.randint(lo, hi) for _ in range(self.degree))


def frobenius_defect(ring: CyclotomicRing, p: int, x: CyclotomicElement) -> CyclotomicElement:
    """σ_p(x) - x^p。"""
    return ring.frobenius(p, x) - x ** p


def cyclotomic_frobenius_check(m: int, p: int, trials: int = 20, rng: random.Random | None = None) -> bool:
    """σ_p(x) ≡ x^p (mod p) を基底の単項式と trials 個の乱数元で確かめる。"""
    if not sympy.isprime(p):
        raise MathInputError(f"{p} is not prime")
    if m % p == 0:
        raise MathInputError(f"p={p} divides the level m={m}")
    ring = CyclotomicRing(m)
    rng = rng or random.Random(0)
    samples = ring.basis() + [ring.random_element(rng, -10, 10) for _ in range(trials)]
    return all(ring.divisible(frobenius_defect(ring, p, x), p) for x in samples)


__all__ = [
    "cyclotomic_polynomial",
    "CyclotomicRing",
    "CyclotomicElement",
    "frobenius_defect",
    "cyclotomic_frobenius_check",
]
