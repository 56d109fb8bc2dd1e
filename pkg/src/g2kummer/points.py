"""Rational points (s/e^2, t/e^5) on a family curve, and the sieved search.

Clearing denominators of y^2 = f(x) forces every rational point into this
shape, so the search space is the integer box (e, s) with the exact identity

    t^2 = s^5 + a2*s^3*e^4 + a3*s^2*e^6 + a4*s*e^8 + a5*e^10 =: N(s, e).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .family import QuinticCurve

_SIEVE_CANDIDATES = (
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    73, 79, 83, 89, 97, 101, 103,
)
_N_SIEVE_PRIMES = 8


@dataclass(frozen=True)
class CurvePoint:
    kind: str  # "infinity" | "affine"
    s: int = 0
    e: int = 1
    t: int = 0

    def __post_init__(self):
        if self.kind == "infinity":
            return
        if self.kind != "affine":
            raise ValueError(f"bad point kind {self.kind!r}")
        if self.e < 1:
            raise ValueError("denominator e must be positive")
        if math.gcd(self.s, self.e) != 1 or math.gcd(self.t, self.e) != 1:
            raise ValueError("point not in lowest terms")

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls(kind="infinity")

    @classmethod
    def affine(cls, s: int, e: int, t: int) -> "CurvePoint":
        return cls(kind="affine", s=s, e=e, t=t)

    @property
    def is_infinity(self) -> bool:
        return self.kind == "infinity"

    @property
    def x(self) -> Fraction:
        if self.is_infinity:
            raise ValueError("infinity has no affine x")
        return Fraction(self.s, self.e**2)

    @property
    def y(self) -> Fraction:
        if self.is_infinity:
            raise ValueError("infinity has no affine y")
        return Fraction(self.t, self.e**5)

    def negate(self) -> "CurvePoint":
        if self.is_infinity:
            return self
        return CurvePoint.affine(self.s, self.e, -self.t)

    @property
    def height_H(self) -> int:
        """Multiplicative height H(x) = max(|s|, e^2)."""
        if self.is_infinity:
            raise ValueError("height of infinity handled at call sites")
        return max(abs(self.s), self.e**2)

    @property
    def h(self) -> float:
        return math.log(self.height_H)

    def to_json_dict(self) -> dict:
        if self.is_infinity:
            return {"kind": "infinity"}
        return {"s": str(self.s), "e": str(self.e), "t": str(self.t)}

    @classmethod
    def from_json_dict(cls, rec: dict) -> "CurvePoint":
        if rec.get("kind") == "infinity":
            return cls.infinity()
        return cls.affine(int(rec["s"]), int(rec["e"]), int(rec["t"]))


def curve_rhs(curve: QuinticCurve, s: int, e: int) -> int:
    """N(s, e): the exact integer that t^2 must equal."""
    e2 = e * e
    e4 = e2 * e2
    s2 = s * s
    return (
        s2 * s2 * s
        + curve.a2 * s2 * s * e4
        + curve.a3 * s2 * e4 * e2
        + curve.a4 * s * e4 * e4
        + curve.a5 * e4 * e4 * e2
    )


def is_on_curve(curve: QuinticCurve, point: CurvePoint) -> bool:
    """Exact membership check, gcd conditions included."""
    if point.is_infinity:
        return True
    if math.gcd(point.s, point.e) != 1 or math.gcd(point.t, point.e) != 1:
        return False
    return point.t * point.t == curve_rhs(curve, point.s, point.e)


def _sieve_primes(curve: QuinticCurve, e: int) -> list[tuple[int, frozenset]]:
    """First 8 odd primes not dividing e*Delta, with their residue tables."""
    out = []
    for p in _SIEVE_CANDIDATES:
        if curve.delta_f % p == 0 or e % p == 0:
            continue
        squares = frozenset((r * r) % p for r in range(p))
        out.append((p, squares))
        if len(out) == _N_SIEVE_PRIMES:
            break
    return out


def _unit_square_classes(e: int) -> tuple[int, frozenset]:
    """Residues mod e^6 attainable as t^2 with gcd(t, e) = 1.

    Implements the congruence t^2 = s^5 + a2*s^3*e^4 (mod e^6) pruning; only
    used when the optional mod-e^6 sieve flag is on.
    """
    m = e**6
    return m, frozenset(
        (t * t) % m for t in range(m) if math.gcd(t, e) == 1
    )


def search_points(
    curve: QuinticCurve,
    e_max: int,
    s_max: int,
    use_e6_sieve: bool = False,
) -> list[CurvePoint]:
    """All points with e <= e_max and |s| <= s_max, plus infinity.

    Outer loop on e, inner on s.  A quadratic-residue prefilter over eight
    odd primes coprime to e*Delta rejects almost all non-squares cheaply; an
    exact integer square root confirms survivors.  Both signs of t come back
    when t != 0, merged in (e, s, sign) order.
    """
    if e_max < 1 or s_max < 1:
        raise ValueError("search box must be nonempty")
    found = [CurvePoint.infinity()]
    for e in range(1, e_max + 1):
        primes = _sieve_primes(curve, e)
        if use_e6_sieve and e > 1 and e**6 <= 60000:
            m6, classes6 = _unit_square_classes(e)
        else:
            m6, classes6 = 0, None
        for s in range(-s_max, s_max + 1):
            if math.gcd(s, e) != 1:
                continue
            n = curve_rhs(curve, s, e)
            if n < 0:
                continue
            for p, squares in primes:
                if n % p not in squares:
                    break
            else:
                if classes6 is not None and n % m6 not in classes6:
                    continue
                t = math.isqrt(n)
                if t * t != n:
                    continue
                assert math.gcd(t, e) == 1  # forced by gcd(s, e) = 1
                found.append(CurvePoint.affine(s, e, t))
                if t != 0:
                    found.append(CurvePoint.affine(s, e, -t))
    return found


def affine_points(points) -> Iterator[CurvePoint]:
    return (p for p in points if not p.is_infinity)
