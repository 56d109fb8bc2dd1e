"""Kabatiansky-Levenshtein spherical-code exponents and the rank-bound
optimizations.

A set of unit vectors with pairwise cos(theta) <= eta has size at most
exp(n * bracket(eta)) with

    bracket = ((1+s)/(2s)) log((1+s)/(2s)) - ((1-s)/(2s)) log((1-s)/(2s)),
    s = sin(arccos(eta)),

so exp(bracket) is the per-dimension base of the exponential bound.  The two
optimizers below balance the base for a maximal separated subset against the
base for the residual clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath as mp

from .errors import DomainError, EmptyInterval

_GRID_POINTS = 10_000


@dataclass(frozen=True)
class KLResult:
    eta: float
    exponent_base: float
    bracket: float


def kl_exponent(eta: float) -> KLResult:
    """Per-dimension exponent base for minimal cosine eta."""
    if not -1 < eta < 1:
        raise DomainError("eta must lie in (-1, 1)")
    with mp.workprec(80):
        e = mp.mpf(eta)
        s = mp.sqrt(1 - e * e)  # sin(arccos(eta))
        t1 = (1 + s) / (2 * s)
        t2 = (1 - s) / (2 * s)
        bracket = t1 * mp.log(t1)
        if t2 > 0:
            bracket -= t2 * mp.log(t2)
        return KLResult(float(eta), float(mp.e**bracket), float(bracket))


def _golden_min(fn: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (a + b) / 2


def _minimize(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-7) -> float:
    """Grid pre-scan (guards against multimodality) then golden refinement."""
    step = (hi - lo) / _GRID_POINTS
    best_i = min(range(_GRID_POINTS + 1), key=lambda i: fn(lo + i * step))
    a = max(lo, lo + (best_i - 2) * step)
    b = min(hi, lo + (best_i + 2) * step)
    return _golden_min(fn, a, b, tol)


def optimize_genus2() -> tuple[float, float, float, float]:
    """Balance the separated-subset and cluster bounds for genus 2.

    Minimizes kl(alpha) * kl(6 - 8*alpha) over alpha in (1/sqrt(2), 3/4];
    returns (alpha_star, base_S, base_cluster, product).
    """
    lo = 1 / math.sqrt(2) + 1e-9
    hi = 0.75

    def objective(a: float) -> float:
        return kl_exponent(a).exponent_base * kl_exponent(6 - 8 * a).exponent_base

    alpha = _minimize(objective, lo, hi)
    base_s = kl_exponent(alpha).exponent_base
    base_cluster = kl_exponent(6 - 8 * alpha).exponent_base
    return alpha, base_s, base_cluster, base_s * base_cluster


def optimize_general_genus(g) -> tuple[float, float]:
    """Same balance for genus g >= 2 (math.inf for the large-genus limit).

    The separation threshold interval is (max(1/sqrt(g), 1/4 + 3/(4g)),
    1/2 + 1/(2g)); the cluster cosine is (1 + 1/g - 2 alpha) / (1/2 - 1/(2g)),
    which the left endpoint keeps at most 1.
    """
    if g == math.inf:
        lo, hi = 0.25, 0.5
        second = lambda a: 2 - 4 * a  # noqa: E731
    else:
        if g < 2:
            raise DomainError("genus must be >= 2 (or math.inf)")
        lo = max(1 / math.sqrt(g), 0.25 + 0.75 / g)
        hi = 0.5 + 0.5 / g
        denom = 0.5 - 0.5 / g
        second = lambda a: (1 + 1.0 / g - 2 * a) / denom  # noqa: E731
    if lo >= hi:
        raise EmptyInterval(f"no admissible alpha for genus {g}")
    eps = 1e-9 * (hi - lo)

    def objective(a: float) -> float:
        eta2 = second(a)
        if not -1 < eta2 < 1:
            return math.inf
        return kl_exponent(a).exponent_base * kl_exponent(eta2).exponent_base

    alpha = _minimize(objective, lo + eps, hi - eps)
    return alpha, objective(alpha)
