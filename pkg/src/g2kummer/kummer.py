"""Kummer-surface pseudo-arithmetic in P^3.

A curve point (x, y) maps to [0, 1, x, x^2]; the surface supports doubling
through four explicit quartic forms and unordered {P+Q, P-Q} coordinates, but
no group law.  The quartics below are transcribed verbatim, one monomial per
table row in printed order; a checksum test pins the row counts and
coefficient sums, and exact identities (two-torsion image, bigraded
homogeneity) guard the transcription end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateImage, EqualX, InfinityOperand
from .family import QuinticCurve
from .points import CurvePoint

#: Monomial tables for the duplication forms delta_1..delta_4.  Row format:
#: (coeff, e_a2, e_a3, e_a4, e_a5, e_k1, e_k2, e_k3, e_k4).  delta_i is
#: bihomogeneous of degree (12+i, 4) for a_j of degree (j, 0), k_j of (j, 1).
DELTA_MONOMIALS: tuple[tuple[tuple[int, ...], ...], ...] = (
    (  # delta_1
        (4, 2, 0, 0, 1, 4, 0, 0, 0),
        (8, 0, 0, 2, 0, 3, 1, 0, 0),
        (-32, 0, 1, 0, 1, 3, 1, 0, 0),
        (-8, 1, 0, 0, 1, 2, 2, 0, 0),
        (4, 0, 0, 0, 1, 0, 4, 0, 0),
        (-16, 1, 0, 0, 1, 3, 0, 1, 0),
        (-4, 1, 0, 1, 0, 2, 1, 1, 0),
        (-16, 0, 0, 0, 1, 1, 2, 1, 0),
        (4, 0, 0, 1, 0, 0, 3, 1, 0),
        (16, 0, 0, 0, 1, 2, 0, 2, 0),
        (-8, 0, 0, 1, 0, 1, 1, 2, 0),
        (4, 0, 1, 0, 0, 0, 2, 2, 0),
        (4, 1, 0, 0, 0, 0, 1, 3, 0),
        (4, 1, 0, 1, 0, 3, 0, 0, 1),
        (-32, 0, 0, 0, 1, 2, 1, 0, 1),
        (-4, 0, 0, 1, 0, 1, 2, 0, 1),
        (-8, 0, 0, 1, 0, 2, 0, 1, 1),
        (-8, 0, 1, 0, 0, 1, 1, 1, 1),
        (-4, 1, 0, 0, 0, 1, 0, 2, 1),
        (8, 0, 0, 0, 0, 0, 0, 3, 1),
        (4, 0, 1, 0, 0, 2, 0, 0, 2),
        (-4, 0, 0, 0, 0, 0, 1, 1, 2),
        (4, 0, 0, 0, 0, 1, 0, 0, 3),
    ),
    (  # delta_2
        (1, 1, 0, 2, 0, 4, 0, 0, 0),
        (-4, 1, 1, 0, 1, 4, 0, 0, 0),
        (16, 0, 0, 0, 2, 4, 0, 0, 0),
        (-4, 2, 0, 0, 1, 3, 1, 0, 0),
        (16, 0, 0, 1, 1, 3, 1, 0, 0),
        (4, 0, 0, 2, 0, 2, 2, 0, 0),
        (-4, 1, 0, 0, 1, 1, 3, 0, 0),
        (-6, 2, 0, 1, 0, 3, 0, 1, 0),
        (16, 0, 0, 2, 0, 3, 0, 1, 0),
        (-32, 0, 1, 0, 1, 3, 0, 1, 0),
        (16, 0, 1, 1, 0, 2, 1, 1, 0),
        (-20, 1, 0, 0, 1, 2, 1, 1, 0),
        (-8, 1, 0, 1, 0, 1, 2, 1, 0),
        (8, 0, 0, 0, 1, 0, 3, 1, 0),
        (5, 3, 0, 0, 0, 2, 0, 2, 0),
        (16, 0, 2, 0, 0, 2, 0, 2, 0),
        (-14, 1, 0, 1, 0, 2, 0, 2, 0),
        (-12, 1, 1, 0, 0, 1, 1, 2, 0),
        (32, 0, 0, 0, 1, 1, 1, 2, 0),
        (4, 0, 0, 1, 0, 0, 2, 2, 0),
        (-6, 2, 0, 0, 0, 1, 0, 3, 0),
        (16, 0, 0, 1, 0, 1, 0, 3, 0),
        (1, 1, 0, 0, 0, 0, 0, 4, 0),
        (4, 1, 0, 0, 1, 3, 0, 0, 1),
        (2, 1, 0, 1, 0, 2, 1, 0, 1),
        (8, 0, 0, 0, 1, 1, 2, 0, 1),
        (4, 0, 0, 1, 0, 0, 3, 0, 1),
        (-12, 1, 1, 0, 0, 2, 0, 1, 1),
        (-16, 0, 0, 0, 1, 2, 0, 1, 1),
        (-10, 2, 0, 0, 0, 1, 1, 1, 1),
        (16, 0, 0, 1, 0, 1, 1, 1, 1),
        (8, 0, 1, 0, 0, 0, 2, 1, 1),
        (16, 0, 1, 0, 0, 1, 0, 2, 1),
        (2, 1, 0, 0, 0, 0, 1, 2, 1),
        (4, 0, 0, 1, 0, 2, 0, 0, 2),
        (8, 0, 1, 0, 0, 1, 1, 0, 2),
        (5, 1, 0, 0, 0, 0, 2, 0, 2),
        (-8, 1, 0, 0, 0, 1, 0, 1, 2),
        (4, 0, 0, 0, 0, 0, 0, 2, 2),
        (4, 0, 0, 0, 0, 0, 1, 0, 3),
    ),
    (  # delta_3
        (4, 0, 1, 2, 0, 4, 0, 0, 0),
        (-16, 0, 2, 0, 1, 4, 0, 0, 0),
        (8, 1, 0, 1, 1, 4, 0, 0, 0),
        (4, 1, 0, 2, 0, 3, 1, 0, 0),
        (-16, 1, 1, 0, 1, 3, 1, 0, 0),
        (-32, 0, 0, 0, 2, 3, 1, 0, 0),
        (-8, 0, 0, 1, 1, 2, 2, 0, 0),
        (4, 0, 0, 2, 0, 1, 3, 0, 0),
        (-16, 0, 1, 0, 1, 1, 3, 0, 0),
        (-8, 2, 0, 0, 1, 3, 0, 1, 0),
        (-16, 0, 0, 1, 1, 3, 0, 1, 0),
        (-8, 0, 0, 2, 0, 2, 1, 1, 0),
        (-24, 1, 0, 0, 1, 1, 2, 1, 0),
        (-8, 0, 1, 1, 0, 2, 0, 2, 0),
        (24, 1, 0, 0, 1, 2, 0, 2, 0),
        (-4, 1, 0, 1, 0, 1, 1, 2, 0),
        (12, 0, 0, 0, 1, 0, 2, 2, 0),
        (-16, 0, 0, 0, 1, 1, 0, 3, 0),
        (8, 0, 0, 1, 0, 0, 1, 3, 0),
        (4, 0, 1, 0, 0, 0, 0, 4, 0),
        (8, 0, 0, 2, 0, 3, 0, 0, 1),
        (-32, 0, 1, 0, 1, 3, 0, 0, 1),
        (-24, 1, 0, 0, 1, 2, 1, 0, 1),
        (-8, 0, 0, 0, 1, 0, 3, 0, 1),
        (-4, 1, 0, 1, 0, 2, 0, 1, 1),
        (-24, 0, 0, 0, 1, 1, 1, 1, 1),
        (-4, 0, 0, 1, 0, 0, 2, 1, 1),
        (-8, 0, 0, 1, 0, 1, 0, 2, 1),
        (4, 1, 0, 0, 0, 0, 0, 3, 1),
        (-12, 0, 0, 0, 1, 2, 0, 0, 2),
        (-4, 0, 0, 1, 0, 1, 1, 0, 2),
        (4, 0, 0, 0, 0, 0, 0, 1, 3),
    ),
    (  # delta_4
        (1, 2, 0, 2, 0, 4, 0, 0, 0),
        (-2, 0, 0, 3, 0, 4, 0, 0, 0),
        (-4, 2, 1, 0, 1, 4, 0, 0, 0),
        (8, 0, 1, 1, 1, 4, 0, 0, 0),
        (-16, 1, 0, 0, 2, 4, 0, 0, 0),
        (-8, 0, 1, 2, 0, 3, 1, 0, 0),
        (32, 0, 2, 0, 1, 3, 1, 0, 0),
        (-16, 1, 0, 1, 1, 3, 1, 0, 0),
        (-2, 1, 0, 2, 0, 2, 2, 0, 0),
        (8, 1, 1, 0, 1, 2, 2, 0, 0),
        (16, 0, 0, 0, 2, 2, 2, 0, 0),
        (1, 0, 0, 2, 0, 0, 4, 0, 0),
        (-4, 0, 1, 0, 1, 0, 4, 0, 0),
        (-4, 1, 0, 2, 0, 3, 0, 1, 0),
        (16, 1, 1, 0, 1, 3, 0, 1, 0),
        (32, 0, 0, 0, 2, 3, 0, 1, 0),
        (8, 2, 0, 0, 1, 2, 1, 1, 0),
        (16, 0, 0, 1, 1, 2, 1, 1, 0),
        (-8, 1, 0, 0, 1, 0, 3, 1, 0),
        (12, 0, 0, 2, 0, 2, 0, 2, 0),
        (-32, 0, 1, 0, 1, 2, 0, 2, 0),
        (-8, 1, 0, 0, 1, 1, 1, 2, 0),
        (-2, 1, 0, 1, 0, 0, 2, 2, 0),
        (-4, 1, 0, 1, 0, 1, 0, 3, 0),
        (-8, 0, 0, 0, 1, 0, 1, 3, 0),
        (1, 2, 0, 0, 0, 0, 0, 4, 0),
        (-2, 0, 0, 1, 0, 0, 0, 4, 0),
        (-8, 2, 0, 0, 1, 3, 0, 0, 1),
        (-12, 0, 0, 2, 0, 2, 1, 0, 1),
        (48, 0, 1, 0, 1, 2, 1, 0, 1),
        (8, 1, 0, 0, 1, 1, 2, 0, 1),
        (16, 1, 0, 0, 1, 2, 0, 1, 1),
        (4, 1, 0, 1, 0, 1, 1, 1, 1),
        (-16, 0, 0, 0, 1, 0, 2, 1, 1),
        (-8, 0, 0, 0, 1, 1, 0, 2, 1),
        (-12, 0, 0, 1, 0, 0, 1, 2, 1),
        (-8, 0, 1, 0, 0, 0, 0, 3, 1),
        (-2, 1, 0, 1, 0, 2, 0, 0, 2),
        (8, 0, 0, 0, 1, 1, 1, 0, 2),
        (-2, 1, 0, 0, 0, 0, 0, 2, 2),
        (1, 0, 0, 0, 0, 0, 0, 0, 4),
    ),
)


#: Frozen from a one-time manual count of the printed forms, done before the
#: table above was typed in; the verifier recomputes the live values and any
#: mismatch flags a corrupted transcription.
EXPECTED_DELTA_CHECKSUMS = ((23, -80), (40, 80), (32, -208), (41, 48))


def delta_checksums() -> list[tuple[int, int]]:
    """(monomial count, coefficient sum) per form, from the live table."""
    return [
        (len(rows), sum(r[0] for r in rows)) for rows in DELTA_MONOMIALS
    ]


def _compile_delta():
    """Straight-line evaluator generated from DELTA_MONOMIALS.

    Keeping the table as the single source and compiling it once avoids a
    hand-written twin of 136 monomials in the hot paths (canonical heights,
    the family-wide two-torsion scan).
    """
    names = ("a2", "a3", "a4", "a5", "k1", "k2", "k3", "k4")
    maxes = [0] * 8
    for rows in DELTA_MONOMIALS:
        for row in rows:
            for i, e in enumerate(row[1:]):
                maxes[i] = max(maxes[i], e)
    lines = [f"def _delta_raw({', '.join(names)}):"]
    for n, m in zip(names, maxes):
        for e in range(2, m + 1):
            prev = n if e == 2 else f"{n}_{e-1}"
            lines.append(f"    {n}_{e} = {prev}*{n}")

    def factor(n, e):
        return None if e == 0 else (n if e == 1 else f"{n}_{e}")

    outs = []
    for idx, rows in enumerate(DELTA_MONOMIALS):
        terms = []
        for row in rows:
            parts = [str(row[0])] + [
                f for f in (factor(n, e) for n, e in zip(names, row[1:])) if f
            ]
            terms.append("*".join(parts))
        var = f"d{idx+1}"
        outs.append(var)
        lines.append(f"    {var} = ({' + '.join(terms)})".replace("+ -", "- "))
    lines.append(f"    return ({', '.join(outs)})")
    ns: dict = {}
    exec("\n".join(lines), ns)  # noqa: S102 - compiled from the frozen table
    return ns["_delta_raw"]


_delta_raw = _compile_delta()


def duplication_raw(curve: QuinticCurve, k: Sequence) -> tuple:
    """(delta_1, ..., delta_4) without any normalization."""
    return _delta_raw(curve.a2, curve.a3, curve.a4, curve.a5, *k)


def _compile_weierstrass_delta():
    """Raw duplication at k = (0, 1, alpha, alpha^2), from the same table.

    Dropping the k1-monomials (they evaluate to zero there) makes the
    family-wide two-torsion scan affordable; the value equals the full
    evaluator's exactly, which the scan spot-checks.
    """
    names = ("a2", "a3", "a4", "a5")
    lines = ["def _wdelta(a2, a3, a4, a5, alpha):"]
    maxpow = 0
    for rows in DELTA_MONOMIALS:
        for row in rows:
            if row[5] == 0:
                maxpow = max(maxpow, row[6] * 0 + row[7] + 2 * row[8])
    lines.append("    p1 = alpha")
    for e in range(2, maxpow + 1):
        lines.append(f"    p{e} = p{e-1}*alpha")

    def kfac(row):
        e = row[7] + 2 * row[8]  # k2 = 1, k3 = alpha, k4 = alpha^2
        return None if e == 0 else ("p1" if e == 1 else f"p{e}")

    outs = []
    for idx, rows in enumerate(DELTA_MONOMIALS):
        terms = []
        for row in rows:
            if row[5] != 0:
                continue
            parts = [str(row[0])]
            for n, e in zip(names, row[1:5]):
                parts.extend([n] * e)
            kf = kfac(row)
            if kf:
                parts.append(kf)
            terms.append("*".join(parts))
        var = f"d{idx+1}"
        outs.append(var)
        lines.append(f"    {var} = ({' + '.join(terms)})".replace("+ -", "- "))
    lines.append(f"    return ({', '.join(outs)})")
    ns: dict = {}
    exec("\n".join(lines), ns)  # noqa: S102 - compiled from the frozen table
    return ns["_wdelta"]


duplication_raw_weierstrass = _compile_weierstrass_delta()


def _normalize(k: Sequence[int]) -> tuple[int, int, int, int]:
    g = 0
    for v in k:
        g = math.gcd(g, v)
    if g == 0:
        raise DegenerateImage("all four coordinates vanish")
    k = tuple(v // g for v in k)
    for v in k:
        if v != 0:
            return k if v > 0 else tuple(-w for w in k)
    raise DegenerateImage("all four coordinates vanish")


@dataclass(frozen=True)
class KummerCoords:
    """Primitive integer projective 4-tuple, first nonzero entry positive."""

    k1: int
    k2: int
    k3: int
    k4: int

    @classmethod
    def from_raw(cls, k: Sequence[int]) -> "KummerCoords":
        return cls(*_normalize([int(v) for v in k]))

    def __iter__(self):
        return iter((self.k1, self.k2, self.k3, self.k4))

    def __getitem__(self, i):
        return (self.k1, self.k2, self.k3, self.k4)[i]

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.k1, self.k2, self.k3, self.k4)

    def to_json_list(self) -> list[str]:
        return [str(v) for v in self]


def kappa(point: CurvePoint) -> KummerCoords:
    """Curve point to Kummer coordinates: (x, y) -> [0, 1, x, x^2].

    Clearing x = s/e^2 gives the primitive integer tuple (0, e^4, s*e^2, s^2);
    infinity maps to the identity class (0, 0, 0, 1).
    """
    if point.is_infinity:
        return KummerCoords(0, 0, 0, 1)
    e2 = point.e * point.e
    return KummerCoords.from_raw((0, e2 * e2, point.s * e2, point.s * point.s))


def double_coords(curve: QuinticCurve, K: KummerCoords) -> KummerCoords:
    """Duplication on the Kummer surface, renormalized to primitive."""
    return KummerCoords.from_raw(duplication_raw(curve, tuple(K)))


def sum_and_diff_coords(
    curve: QuinticCurve, P: CurvePoint, Q: CurvePoint
) -> tuple[KummerCoords, KummerCoords]:
    """Unordered pair {kappa(P+Q), kappa(P-Q)} as primitive integer tuples.

    Returned as (sum, diff) where the sum member carries the -2Yy term and
    the difference member the +2Yy term; downstream formulas treat the pair
    as unordered wherever they are sign-symmetric.
    """
    if P.is_infinity or Q.is_infinity:
        raise InfinityOperand("P +- infinity is P; use kappa directly")
    S, D, U = P.s, P.e, P.t
    s, d, u = Q.s, Q.e, Q.t
    D2, d2 = D * D, d * d
    cross_m = S * d2 - s * D2
    if cross_m == 0:
        raise EqualX("x(P) = x(Q); sum/difference coordinates degenerate")
    cross_p = S * d2 + s * D2
    D4d4 = D2 * D2 * d2 * d2
    Ss = S * s
    k1 = D2 * d2 * cross_m * cross_m
    k2 = cross_m * cross_m * cross_p
    k3 = Ss * cross_m * cross_m
    base4 = (
        2 * curve.a5 * D4d4 * D2 * d2
        + curve.a4 * D4d4 * cross_p
        + 2 * curve.a3 * D4d4 * Ss
        + curve.a2 * D2 * d2 * Ss * cross_p
        + Ss * Ss * cross_p
    )
    yy = 2 * D * d * U * u
    ksum = KummerCoords.from_raw((k1, k2, k3, base4 - yy))
    kdiff = KummerCoords.from_raw((k1, k2, k3, base4 + yy))
    return ksum, kdiff


#: Sentinel accepted by ell_form for the form attached to infinity.
ELL_INFINITY = "infinity"


def ell_form(rho, K: Sequence, curve: QuinticCurve | None = None):
    """Linear form cutting out the divisor attached to rho, evaluated at K.

    rho may be a root value (form rho^2*w - rho*x + y), the ELL_INFINITY
    sentinel (form w), or a pair (alpha, beta) of distinct roots, which needs
    the curve coefficients.
    """
    w, x, y, z = K[0], K[1], K[2], K[3]
    if isinstance(rho, str):
        if rho != ELL_INFINITY:
            raise ValueError(f"unknown linear form tag {rho!r}")
        return w
    if isinstance(rho, tuple):
        alpha, beta = rho
        if alpha == beta:
            raise ValueError("pair form needs distinct roots")
        if curve is None:
            raise ValueError("pair form needs the curve coefficients")
        sig = alpha + beta
        pi = alpha * beta
        num = (
            2 * curve.a5
            + curve.a4 * sig
            + 2 * curve.a3 * pi
            + curve.a2 * pi * sig
            + pi * pi * sig
        )
        return num / (alpha - beta) ** 2 * w + pi * x - sig * y + z
    return rho * rho * w - rho * x + y
