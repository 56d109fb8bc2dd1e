"""Deterministic curve/point corpora used by calibration and the test suite.

Everything here is a pure function of fixed scan orders and seeds, so the
same curves and points come back on every run.
"""

from __future__ import annotations

import random
from functools import lru_cache

import mpmath as mp

from .family import QuinticCurve, complex_roots, disc_fast
from .points import CurvePoint, search_points

CURVE_X5_PLUS_1 = (0, 0, 0, 1)
CURVE_X5_MINUS_X = (0, 0, -1, 0)


def named_curves() -> dict[str, QuinticCurve]:
    return {
        "x5+1": QuinticCurve(*CURVE_X5_PLUS_1),
        "x5-x": QuinticCurve(*CURVE_X5_MINUS_X),
    }


def _min_root_gap(curve: QuinticCurve) -> float:
    roots = complex_roots(curve, 64)
    return float(
        min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:])
    )


def has_generic_igusa(curve: QuinticCurve, rel_tol: float = 1e-2) -> bool:
    """True unless the curve sits on (or hugs) the I4 = 0 locus.

    Curves with I4 = 0 (e.g. x^5 + 1) make the reduced invariant a 0/0 and
    are useless for the cross-method ratio check.
    """
    from .analytic import igusa_i3

    i3 = igusa_i3(curve, "roots", precision_bits=64)
    scale = (1 + curve.height_H) ** 40 / abs(curve.delta_f) ** 2
    return bool(abs(i3) > rel_tol**8 * scale)


@lru_cache(maxsize=1)
def analytic_corpus() -> list[QuinticCurve]:
    """Twelve tame curves with rational points, for the theta machinery.

    Scan order is lexicographic over a small box; kept are curves with at
    least one affine point in a tiny search box, branch points separated
    well enough for comfortable quadrature and (for the ten generic ones)
    an Igusa I4 bounded away from zero.
    """
    out = [QuinticCurve(*CURVE_X5_PLUS_1), QuinticCurve(*CURVE_X5_MINUS_X)]
    seen = {c.coeffs() for c in out}
    rng = random.Random(1729)
    while len(out) < 12:
        coeffs = (
            rng.randint(-2, 2),
            rng.randint(-3, 3),
            rng.randint(-4, 4),
            rng.randint(-6, 6),
        )
        if coeffs in seen:
            continue
        seen.add(coeffs)
        if disc_fast(*coeffs) == 0:
            continue
        curve = QuinticCurve(*coeffs)
        if _min_root_gap(curve) < 0.25:
            continue
        pts = search_points(curve, e_max=2, s_max=25)
        if len(pts) < 2:
            continue
        if not has_generic_igusa(curve):
            continue
        out.append(curve)
    return out


@lru_cache(maxsize=1)
def height_corpus() -> list[tuple[QuinticCurve, CurvePoint]]:
    """At least 25 (curve, affine point) pairs from a T <= 4, e <= 8 search."""
    pairs: list[tuple[QuinticCurve, CurvePoint]] = []
    for curve in analytic_corpus():
        for pt in search_points(curve, e_max=8, s_max=60):
            if not pt.is_infinity and pt.t >= 0:
                pairs.append((curve, pt))
    rng = random.Random(20240601)
    seen = {c.coeffs() for c in analytic_corpus()}
    while len(pairs) < 30:
        coeffs = tuple(rng.randint(-(4**i), 4**i) for i in (2, 3, 4, 5))
        if coeffs in seen or disc_fast(*coeffs) == 0:
            continue
        seen.add(coeffs)
        curve = QuinticCurve(*coeffs)
        for pt in search_points(curve, e_max=8, s_max=40):
            if not pt.is_infinity and pt.t >= 0:
                pairs.append((curve, pt))
    return pairs


@lru_cache(maxsize=1)
def pair_corpus() -> list[tuple[QuinticCurve, CurvePoint, CurvePoint]]:
    """Same-curve point pairs with distinct x, for pairing/parallelogram laws."""
    by_curve: dict = {}
    for curve, pt in height_corpus():
        by_curve.setdefault(curve.coeffs(), (curve, []))[1].append(pt)
    out = []
    for _, (curve, pts) in sorted(by_curve.items()):
        for i, p in enumerate(pts):
            for q in pts[i + 1:]:
                if p.s * q.e**2 != q.s * p.e**2:
                    out.append((curve, p, q))
    return out
