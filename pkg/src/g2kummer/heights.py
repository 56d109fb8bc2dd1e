"""Naive and canonical heights on the Kummer surface.

The canonical height is assembled as

    hhat(K) = h_K(K) + mu_inf + sum_p mu_p

by telescoping the duplication orbit: the Archimedean term accumulates
4^(-n-1) * (lambda_inf(2K_n) - 4*lambda_inf(K_n)) on a sup-norm-normalized
float orbit, and each finite term accumulates -4^(-n-1) * v_p(g_n) * log p
where g_n is the content extracted when renormalizing the integer orbit to
primitive.  Stoll's bound confines the g_n to primes dividing 2*Delta and
caps every |mu_p| by (1/3) * v_p(2^4 Delta) * log p, which also yields the
rigorous geometric tail estimates carried in the error radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

import mpmath as mp

from .errors import (
    DegenerateImage,
    InfinityPoint,
    InvariantViolation,
    PrecisionExhausted,
    TorsionOperand,
)
from .family import QuinticCurve
from .points import CurvePoint
from .kummer import KummerCoords, duplication_raw, kappa, sum_and_diff_coords

#: Archimedean one-step bound is 12*h(f) + C_ARCH_DEFAULT; the calibrated
#: value lives in frozen_constants.json, this is the fallback.
C_ARCH_DEFAULT = 25.0

_EXACT_STEP_BITCAP = 120_000
_PADIC_BUDGET_BITS = 1_000_000


class Bound(NamedTuple):
    """A real value with an outward error radius."""

    value: float
    radius: float

    def overlaps(self, other: "Bound") -> bool:
        return abs(self.value - other.value) <= self.radius + other.radius


def naive_height_x(point: CurvePoint) -> float:
    """h(x(P)) = log max(|s|, e^2) for an affine point."""
    if point.is_infinity:
        raise InfinityPoint("height of infinity is a call-site convention")
    return math.log(point.height_H)


def naive_hK(K: KummerCoords) -> float:
    """Logarithmic Weil height of primitive coordinates: log max |k_i|."""
    m = max(abs(v) for v in K)
    return float(mp.log(m))


def stoll_cap(curve: QuinticCurve, p: int) -> int:
    """v_p(2^4 * Delta_f) = v_p(2^12 * disc)."""
    v = 12 if p == 2 else 0
    d = abs(curve.disc_f)
    while d % p == 0:
        v += 1
        d //= p
    return v


def bad_primes(curve: QuinticCurve) -> list[int]:
    """2 plus the odd primes with v_p(Delta_f) >= 2.

    Content extracted along the duplication orbit is supported on these
    primes (Stoll); the exact phase of canonical_height asserts it.
    """
    cached = curve._analytic_cache.get("bad_primes")
    if cached is not None:
        return cached
    from sympy import factorint  # deferred: sympy import is heavy

    primes = [2]
    for p, e in sorted(factorint(abs(curve.disc_f)).items()):
        if p != 2 and e >= 2:
            primes.append(p)
    curve._analytic_cache["bad_primes"] = primes
    return primes


def _lambda_inf(vec) -> mp.mpf:
    return mp.log(max(abs(v) for v in vec))


def _mu_inf_orbit(curve: QuinticCurve, K, n_steps: int, precision_bits: int):
    """Normalized Archimedean orbit; returns (mu_inf, per-step increments)."""
    with mp.workprec(precision_bits):
        m0 = mp.mpf(max(abs(v) for v in K))
        x = tuple(mp.mpf(v) / m0 for v in K)
        mu = mp.mpf(0)
        eps = []
        q = mp.mpf(1)
        for _ in range(n_steps):
            d = duplication_raw(curve, x)
            m = max(abs(v) for v in d)
            if m == 0:
                raise DegenerateImage("duplication vanished on float orbit")
            e = mp.log(m)
            eps.append(e)
            q /= 4
            mu += q * e
            x = tuple(v / m for v in d)
        return mu, eps


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        v += 1
        n //= p
    return v


def _mu_p_orbit(curve: QuinticCurve, K, p: int, n_steps: int):
    """p-adic duplication orbit; returns (sum_n v_n/4^(n+1), [v_n]).

    Coordinates are carried modulo p^digits; each step divides out the
    minimal valuation.  Precision is restarted twice as large whenever the
    remaining digits could no longer certify the next extraction.
    """
    cap = stoll_cap(curve, p)
    digits = cap * (n_steps + 2) + 32
    while digits * math.log2(p) <= _PADIC_BUDGET_BITS:
        mod = p**digits
        y = tuple(v % mod for v in K)
        rem = digits
        vs: list[int] = []
        ok = True
        for _ in range(n_steps):
            pr = p**rem
            z = [v % pr for v in duplication_raw(curve, y)]
            nz = [v for v in z if v != 0]
            if not nz:
                ok = False  # total valuation loss; need more digits
                break
            v = min(_vp(v, p) for v in nz)
            rem -= v
            if rem < cap + 8:
                ok = False
                break
            pv = p**v
            prn = p**rem
            y = tuple((zi // pv) % prn for zi in z)
            vs.append(v)
        if ok:
            acc = Fraction(0)
            q = Fraction(1)
            for v in vs:
                q /= 4
                acc += v * q
            return acc, vs
        digits *= 2
    raise PrecisionExhausted(f"p-adic budget exceeded at p={p}")


def _exact_orbit(curve: QuinticCurve, K: KummerCoords, primes, max_steps: int):
    """Exact integer duplication steps while coordinates stay small.

    Returns per-step (valuation dict over the bad primes, increment
    lambda_inf(2K_n) - 4*lambda_inf(K_n) as mpf).  Asserts that extracted
    content factors completely over the bad primes.
    """
    steps = []
    cur = K.as_tuple()
    for _ in range(max_steps):
        if max(abs(v) for v in cur).bit_length() > _EXACT_STEP_BITCAP:
            break
        raw = duplication_raw(curve, cur)
        g = 0
        for v in raw:
            g = math.gcd(g, v)
        if g == 0:
            raise DegenerateImage("duplication vanished on exact orbit")
        vals = {}
        rest = g
        for p in primes:
            v = _vp(rest, p)
            if v:
                vals[p] = v
                rest //= p**v
        if rest != 1:
            raise InvariantViolation(
                f"orbit content has factor {rest} outside the bad primes"
            )
        inc = _lambda_inf(raw) - 4 * _lambda_inf(cur)
        steps.append((vals, inc))
        cur = tuple(v // g for v in raw)
    return steps


@dataclass(frozen=True)
class CanonicalHeightResult:
    value: float
    error_radius: float
    n_doublings: int
    prime_corrections: dict[int, float]
    archimedean_correction: float
    naive: float

    def as_bound(self) -> Bound:
        return Bound(self.value, self.error_radius)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "err": self.error_radius,
            "mu_inf": self.archimedean_correction,
            "mu_p": {str(p): v for p, v in self.prime_corrections.items()},
            "n": self.n_doublings,
        }


def _steps_for_tail(step_bound: float, target: float, lo: int = 4, hi: int = 80) -> int:
    """Smallest N with step_bound * 4^-N / 3 < target (geometric tail)."""
    n = lo
    while step_bound / (3 * 4.0**n) >= target and n < hi:
        n += 1
    return n


def canonical_height(
    curve: QuinticCurve,
    K: KummerCoords,
    target_error: float = 1e-8,
    precision_bits: int = 256,
    c_arch: Optional[float] = None,
) -> CanonicalHeightResult:
    """Canonical height of the class of K with a rigorous error radius.

    The Archimedean and finite correction orbits both run until their
    geometric tail bounds drop below target_error; the first couple of
    doublings are replayed in exact integers to cross-check the streamed
    orbits and to assert Stoll's support property for the extracted content.
    """
    if target_error <= 0:
        raise ValueError("target_error must be positive")
    if c_arch is None:
        from .calibration import frozen_constants

        c_arch = frozen_constants().get("c_arch", C_ARCH_DEFAULT)

    h = curve.h_f
    primes = bad_primes(curve)
    arch_step_bound = 12 * h + c_arch
    n_arch = _steps_for_tail(arch_step_bound, target_error / 3)
    per_prime_target = target_error / (3 * len(primes))

    with mp.workprec(precision_bits):
        naive = mp.log(max(abs(v) for v in K))
        mu_inf, eps_stream = _mu_inf_orbit(curve, K.as_tuple(), n_arch, precision_bits)

        mu_p: dict[int, float] = {}
        tail_fin = 0.0
        v_streams: dict[int, list[int]] = {}
        for p in primes:
            cap = stoll_cap(curve, p)
            n_p = _steps_for_tail(cap * math.log(p), per_prime_target, lo=2, hi=60)
            frac, vs = _mu_p_orbit(curve, K.as_tuple(), p, n_p)
            mu_p[p] = float(-frac * mp.log(p))
            v_streams[p] = vs
            tail_fin += cap * math.log(p) / (3 * 4.0**n_p)

        # replay a couple of steps exactly: content must factor over the bad
        # primes, and both streamed orbits must reproduce the exact data
        for n, (vals, inc) in enumerate(_exact_orbit(curve, K, primes, 2)):
            for p in primes:
                if vals.get(p, 0) != (
                    v_streams[p][n] if n < len(v_streams[p]) else 0
                ):
                    raise InvariantViolation(
                        f"p-adic orbit disagrees with exact orbit at p={p}, step {n}"
                    )
            if abs(inc - eps_stream[n]) > mp.mpf(2) ** (-(precision_bits // 2)):
                raise InvariantViolation(
                    f"float orbit disagrees with exact orbit at step {n}"
                )

        tail_arch = arch_step_bound / (3 * 4.0**n_arch)
        slop = float(mp.mpf(2) ** (-(precision_bits // 2)))
        value = float(naive + mu_inf + mp.fsum(mu_p.values()))
        radius = tail_arch + tail_fin + slop

    # hhat >= 0 up to the radius; a materially negative value is a bug
    if value < -radius - 1e-12:
        raise InvariantViolation(f"negative canonical height {value}")
    return CanonicalHeightResult(
        value=value,
        error_radius=radius,
        n_doublings=n_arch,
        prime_corrections=mu_p,
        archimedean_correction=float(mu_inf),
        naive=float(naive),
    )


def lambda_inf_telescoped(
    curve: QuinticCurve,
    K: KummerCoords,
    precision_bits: int = 256,
    n_steps: int = 28,
    c_arch: float = C_ARCH_DEFAULT,
) -> Bound:
    """Archimedean local canonical height of the lift K, by telescoping.

    This is lambda_inf(K) + mu_inf; it is the per-place counterpart of
    canonical_height and the independent oracle for the theta-function path.
    """
    with mp.workprec(precision_bits):
        lam0 = mp.log(max(abs(v) for v in K))
        mu_inf, _ = _mu_inf_orbit(curve, K.as_tuple(), n_steps, precision_bits)
        tail = (12 * curve.h_f + c_arch) / (3 * 4.0**n_steps)
        return Bound(float(lam0 + mu_inf), tail + 1e-20)


def height_of_point(
    curve: QuinticCurve, P: CurvePoint, **kwargs
) -> CanonicalHeightResult:
    return canonical_height(curve, kappa(P), **kwargs)


def pairing(curve: QuinticCurve, P: CurvePoint, Q: CurvePoint, **kwargs) -> Bound:
    """Height pairing <P, Q> = (hhat(P+Q) - hhat(P) - hhat(Q)) / 2.

    Uses the sum member of the unordered {P+Q, P-Q} coordinates; the error
    radius is the propagated sum of the three component radii.  Q = +-P is
    routed through duplication, where the same telescoping identity reads
    <P, +-P> = +-(hhat(2P) - 2 hhat(P)) / 2.
    """
    from .kummer import double_coords

    if not P.is_infinity and not Q.is_infinity and P.s * Q.e**2 == Q.s * P.e**2:
        sign = 1 if P.t == Q.t else -1
        hp = height_of_point(curve, P, **kwargs)
        h2 = canonical_height(curve, double_coords(curve, kappa(P)), **kwargs)
        val = (h2.value - 2 * hp.value) / 2
        rad = (h2.error_radius + 2 * hp.error_radius) / 2
        return Bound(sign * val, rad)
    ksum, _ = sum_and_diff_coords(curve, P, Q)
    hs = canonical_height(curve, ksum, **kwargs)
    hp = height_of_point(curve, P, **kwargs)
    hq = height_of_point(curve, Q, **kwargs)
    val = (hs.value - hp.value - hq.value) / 2
    rad = (hs.error_radius + hp.error_radius + hq.error_radius) / 2
    return Bound(val, rad)


def cos_theta(curve: QuinticCurve, P: CurvePoint, Q: CurvePoint, **kwargs) -> Bound:
    """cos of the Mordell-Weil angle between P and Q, interval-propagated."""
    hp = height_of_point(curve, P, **kwargs)
    hq = height_of_point(curve, Q, **kwargs)
    for hres, pt in ((hp, P), (hq, Q)):
        if hres.value <= hres.error_radius:
            raise TorsionOperand(f"height of {pt} indistinguishable from zero")
    pair = pairing(curve, P, Q, **kwargs)
    s = math.sqrt(hp.value * hq.value)
    raw = pair.value / s
    rad = pair.radius / s + abs(raw) * (
        hp.error_radius / hp.value + hq.error_radius / hq.value
    ) / 2
    if abs(raw) > 1 + rad + 1e-9:
        raise InvariantViolation(f"cos(theta) = {raw} exits [-1, 1] beyond radius")
    return Bound(max(-1.0, min(1.0, raw)), rad)
