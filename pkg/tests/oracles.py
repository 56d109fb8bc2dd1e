"""Independent brute-force oracles, kept deliberately naive.

Everything here recomputes reference values without touching the package's
fast paths (no sieves, no Bareiss elimination, no streamed orbits), so the
tests can pin the optimized code against straight-line definitions.
"""

import math
from fractions import Fraction

import mpmath as mp

from g2kummer.family import sylvester_matrix
from g2kummer.kummer import duplication_raw
from g2kummer.points import CurvePoint


def det_cofactor(m):
    """Determinant by recursive cofactor expansion (zero entries skipped)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j, head in enumerate(m[0]):
        if head == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * head * det_cofactor(minor)
    return total


def sylvester_resultant(a2, a3, a4, a5):
    return det_cofactor(sylvester_matrix(a2, a3, a4, a5))


def brute_force_points(curve, e_max, s_max):
    """Unsieved point search: full integer square test over the box."""
    found = [CurvePoint.infinity()]
    for e in range(1, e_max + 1):
        for s in range(-s_max, s_max + 1):
            if math.gcd(s, e) != 1:
                continue
            n = (
                s**5
                + curve.a2 * s**3 * e**4
                + curve.a3 * s**2 * e**6
                + curve.a4 * s * e**8
                + curve.a5 * e**10
            )
            if n < 0:
                continue
            t = math.isqrt(n)
            if t * t == n:
                found.append(CurvePoint.affine(s, e, t))
                if t != 0:
                    found.append(CurvePoint.affine(s, e, -t))
    return found


def exact_telescoped_height(curve, K, n_steps=20, bit_cap=2_000_000):
    """h_K(2^n P) / 4^n by exact integer duplication, the defining limit.

    Only feasible when coordinate growth stays under bit_cap (torsion orbits
    and small step counts); returns (value, n_reached).
    """
    cur = tuple(K)
    n = 0
    while n < n_steps:
        if max(abs(v) for v in cur).bit_length() > bit_cap:
            break
        raw = duplication_raw(curve, cur)
        g = 0
        for v in raw:
            g = math.gcd(g, v)
        if g == 0:
            raise ZeroDivisionError("orbit hit the degenerate image")
        cur = tuple(v // g for v in raw)
        n += 1
    with mp.workprec(512):
        return float(mp.log(max(abs(v) for v in cur)) / 4**n), n


def exact_x(p: CurvePoint) -> Fraction:
    return Fraction(p.s, p.e**2)
