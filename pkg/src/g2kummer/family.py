"""The curve family y^2 = x^5 + a2*x^3 + a3*x^2 + a4*x + a5.

Curves are ordered by the naive height H(f) = max_i |a_i|^(1/i); the family
box at cutoff T is |a_i| <= T^i.  A tuple is admitted only when the
discriminant resultant Res(f, f') is nonzero.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import mpmath as mp

from .errors import NonConvergence

#: Multiplier turning Res(f, f') into the Delta used everywhere in the package.
DELTA_SHIFT = 2**8

_ROOT_CERT_SHIFT = 2  # residual certified to 2^(-prec/_ROOT_CERT_SHIFT)


def sylvester_matrix(a2: int, a3: int, a4: int, a5: int) -> list[list[int]]:
    """9x9 Sylvester matrix of f = x^5+a2*x^3+a3*x^2+a4*x+a5 and f'."""
    f = [1, 0, a2, a3, a4, a5]
    fp = [5, 0, 3 * a2, 2 * a3, a4]
    rows = []
    for i in range(4):  # deg f' = 4 shifted copies of f
        rows.append([0] * i + f + [0] * (4 - 1 - i))
    for i in range(5):  # deg f = 5 shifted copies of f'
        rows.append([0] * i + fp + [0] * (5 - 1 - i))
    return rows


def _bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free exact determinant (Bareiss) of an integer matrix."""
    a = [row[:] for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def discriminant(a2: int, a3: int, a4: int, a5: int) -> int:
    """Res(f, f') computed exactly over the integers (Sylvester/Bareiss)."""
    return _bareiss_det(sylvester_matrix(a2, a3, a4, a5))


def disc_fast(a2: int, a3: int, a4: int, a5: int) -> int:
    """Res(f, f') as a frozen 19-term expansion, for enumeration hot loops.

    Expanded once from the Sylvester determinant with a computer-algebra run;
    tests pin it against :func:`discriminant` on random tuples.
    """
    a2_2 = a2 * a2
    a2_3 = a2_2 * a2
    a3_2 = a3 * a3
    a4_2 = a4 * a4
    a4_3 = a4_2 * a4
    a5_2 = a5 * a5
    return (
        108 * a2_3 * a2_2 * a5_2
        - 72 * a2_2 * a2_2 * a3 * a4 * a5
        + 16 * a2_2 * a2_2 * a4_3
        + 16 * a2_3 * a3_2 * a3 * a5
        - 4 * a2_3 * a3_2 * a4_2
        - 900 * a2_3 * a4 * a5_2
        + 825 * a2_2 * a3_2 * a5_2
        + 560 * a2_2 * a3 * a4_2 * a5
        - 128 * a2_2 * a4_2 * a4_2
        - 630 * a2 * a3_2 * a3 * a4 * a5
        + 144 * a2 * a3_2 * a4_3
        - 3750 * a2 * a3 * a5_2 * a5
        + 2000 * a2 * a4_2 * a5_2
        + 108 * a3_2 * a3_2 * a3 * a5
        - 27 * a3_2 * a3_2 * a4_2
        + 2250 * a3_2 * a4 * a5_2
        - 1600 * a3 * a4_3 * a5
        + 256 * a4_3 * a4_2
        + 3125 * a5_2 * a5_2
    )


@dataclass(frozen=True)
class QuinticCurve:
    """A nonsingular member of the family, with cached analytic data."""

    a2: int
    a3: int
    a4: int
    a5: int
    disc_f: int = field(init=False, compare=False, repr=False)
    delta_f: int = field(init=False, compare=False, repr=False)
    _root_cache: dict = field(
        init=False, compare=False, repr=False, default_factory=dict
    )
    _cache_lock: threading.Lock = field(
        init=False, compare=False, repr=False, default_factory=threading.Lock
    )
    _analytic_cache: dict = field(
        init=False, compare=False, repr=False, default_factory=dict
    )

    def __post_init__(self):
        # disc_fast is pinned against the Sylvester determinant by tests;
        # using it here keeps family enumeration cheap
        d = disc_fast(self.a2, self.a3, self.a4, self.a5)
        if d == 0:
            raise ValueError(f"singular curve {self.coeffs()}: discriminant is zero")
        object.__setattr__(self, "disc_f", d)
        object.__setattr__(self, "delta_f", DELTA_SHIFT * d)

    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.a2, self.a3, self.a4, self.a5)

    @property
    def height_H(self) -> float:
        return max(abs(a) ** (1.0 / i) for i, a in zip((2, 3, 4, 5), self.coeffs()))

    @property
    def h_f(self) -> float:
        return max(0.0, math.log(self.height_H))

    def f_at(self, x):
        """f(x) by Horner; works for ints, Fractions, mpf/mpc."""
        return ((((x * x + self.a2) * x + self.a3) * x + self.a4) * x) + self.a5

    def fprime_at(self, x):
        return ((5 * x * x + 3 * self.a2) * x + 2 * self.a3) * x + self.a4

    def roots(self, precision_bits: int = 128):
        return complex_roots(self, precision_bits)

    def to_json_dict(self) -> dict:
        return {
            "a": list(self.coeffs()),
            "disc": str(self.disc_f),
            "delta": str(self.delta_f),
            "H": self.height_H,
        }

    @classmethod
    def from_json_dict(cls, rec: dict) -> "QuinticCurve":
        curve = cls(*(int(v) for v in rec["a"]))
        if "disc" in rec and int(rec["disc"]) != curve.disc_f:
            raise ValueError("stored discriminant disagrees with coefficients")
        return curve


def _certified(curve: QuinticCurve, roots, precision_bits: int) -> bool:
    tol = mp.mpf(2) ** (-(precision_bits // _ROOT_CERT_SHIFT))
    if len(roots) != 5:
        return False
    for r in roots:
        if abs(curve.f_at(r)) > tol * max(1, abs(r)) ** 5:
            return False
    if abs(sum(roots)) > tol * max(1, max(abs(r) for r in roots)):
        return False  # a1 = 0 forces the roots to sum to zero
    for i in range(5):
        for j in range(i + 1, 5):
            if abs(roots[i] - roots[j]) <= tol:
                return False
    return True


def complex_roots(curve: QuinticCurve, precision_bits: int):
    """The five roots of f, certified and cached per precision.

    Cached values are reused for any request at or below their precision;
    recomputation only ever raises the precision.  Roots come back sorted by
    (re, im) so downstream tie-breaking is deterministic.
    """
    if precision_bits < 53:
        raise ValueError("precision_bits must be >= 53")
    with curve._cache_lock:
        for bits, roots in curve._root_cache.items():
            if bits >= precision_bits:
                return roots

    prec = precision_bits + 32
    last_exc: Exception | None = None
    for _ in range(5):
        with mp.workprec(prec):
            try:
                raw = mp.polyroots(
                    [1, 0, curve.a2, curve.a3, curve.a4, curve.a5],
                    maxsteps=200,
                    extraprec=prec // 2,
                )
            except mp.libmp.NoConvergence as exc:  # retry at doubled precision
                last_exc = exc
                prec *= 2
                continue
            roots = tuple(
                sorted((mp.mpc(r) for r in raw), key=lambda z: (z.real, z.imag))
            )
            if _certified(curve, roots, precision_bits):
                with curve._cache_lock:
                    curve._root_cache.setdefault(precision_bits, roots)
                return roots
        prec *= 2
    raise NonConvergence(
        f"root finder failed at {precision_bits} bits for {curve.coeffs()}"
    ) from last_exc


def alpha_beta_star(curve: QuinticCurve, precision_bits: int = 128):
    """The root pair maximizing min(|a|, |b|, |a-b|).

    The maximum is guaranteed to be >= H(f)/1e10; ties break lexicographically
    on (re, im) of the ordered pair so the choice is stable across runs.
    """
    roots = complex_roots(curve, precision_bits)
    best = None
    best_key = None
    for i in range(5):
        for j in range(i + 1, 5):
            a, b = roots[i], roots[j]
            if (a.real, a.imag) > (b.real, b.imag):
                a, b = b, a
            score = min(abs(a), abs(b), abs(a - b))
            key = (-score, a.real, a.imag, b.real, b.imag)
            if best_key is None or key < best_key:
                best_key = key
                best = (a, b)
    assert best is not None
    if -best_key[0] < curve.height_H / 1e10:
        raise NonConvergence(
            "no root pair passes the H/1e10 separation bound; raise precision"
        )
    return best


def family_bounds(T: float) -> tuple[int, int, int, int]:
    """Coefficient box |a_i| <= T^i, i = 2..5."""
    if T < 1:
        raise ValueError("family cutoff T must be >= 1")
    return tuple(int(math.floor(T**i + 1e-12)) for i in (2, 3, 4, 5))


def enumerate_family(
    T: float, predicate: Optional[Callable[[QuinticCurve], bool]] = None
) -> Iterator[QuinticCurve]:
    """All admitted curves with |a_i| <= T^i, lexicographic in (a2,a3,a4,a5)."""
    b2, b3, b4, b5 = family_bounds(T)
    for a2 in range(-b2, b2 + 1):
        for a3 in range(-b3, b3 + 1):
            for a4 in range(-b4, b4 + 1):
                for a5 in range(-b5, b5 + 1):
                    if disc_fast(a2, a3, a4, a5) == 0:
                        continue
                    curve = QuinticCurve(a2, a3, a4, a5)
                    if predicate is None or predicate(curve):
                        yield curve


def integral_two_torsion_pairs(T: float) -> Iterator[tuple[tuple[int, int, int, int], int]]:
    """All (coeffs, alpha) with alpha an integer root of an admitted curve.

    Parameterized by (alpha, a2, a3, a4) with a5 solved from f(alpha) = 0, so
    the T <= 3 slice stays scannable; tests pin the output against a direct
    root scan of the enumerated family at small T.
    """
    b2, b3, b4, b5 = family_bounds(T)
    alpha_cap = int(math.floor(2 * T + 1e-9))
    for alpha in range(-alpha_cap, alpha_cap + 1):
        a_pow5 = alpha**5
        a_pow3 = alpha**3
        a_pow2 = alpha * alpha
        for a2 in range(-b2, b2 + 1):
            t2 = a_pow5 + a2 * a_pow3
            for a3 in range(-b3, b3 + 1):
                t3 = t2 + a3 * a_pow2
                for a4 in range(-b4, b4 + 1):
                    a5 = -(t3 + a4 * alpha)
                    if a5 < -b5 or a5 > b5:
                        continue
                    if disc_fast(a2, a3, a4, a5) == 0:
                        continue
                    yield (a2, a3, a4, a5), alpha
