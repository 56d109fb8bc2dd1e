"""Fitted-and-frozen constants.

Several bounds in the height and theta machinery carry unspecified O(1)
constants.  They are fitted once over a deterministic corpus by
``calibrate`` and frozen into ``frozen_constants.json`` (shipped with the
package); tests fail when recalibration drifts by more than 10%.  All of
these constants are monitoring thresholds, never part of a proof.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from functools import lru_cache
from pathlib import Path

DRIFT_TOLERANCE = 0.10

_SCALAR_KEYS = (
    "c_arch",
    "c_xi",
    "im_tau1_c_fit",
    "delta_h20_c",
    "theta_near_zero_c",
    "mu_hat",
)


@lru_cache(maxsize=1)
def frozen_constants() -> dict:
    """Constants shipped with the package; empty dict if not yet calibrated."""
    ref = importlib.resources.files("g2kummer").joinpath("frozen_constants.json")
    try:
        return json.loads(ref.read_text())
    except FileNotFoundError:
        return {}


def save_constants(constants: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(constants, indent=2, sort_keys=True) + "\n")


def drift(old: dict, new: dict) -> float:
    """Largest relative change over the scalar constants present in both."""
    worst = 0.0
    for key in _SCALAR_KEYS:
        if key in old and key in new:
            a, b = old[key], new[key]
            denom = max(abs(a), abs(b), 1e-12)
            worst = max(worst, abs(a - b) / denom)
    if "i3_ratio" in old and "i3_ratio" in new:
        ra = complex(*old["i3_ratio"])
        rb = complex(*new["i3_ratio"])
        worst = max(worst, abs(ra - rb) / max(abs(ra), abs(rb), 1e-12))
    return worst


def calibrate(precision_bits: int = 192, seed: int = 0) -> dict:
    """Fit every frozen constant over the deterministic calibration corpus.

    Slow (computes period matrices for the whole analytic corpus); meant to
    run through the CLI ``calibrate`` subcommand, not on import.
    """
    import random

    import mpmath as mp

    from . import analytic
    from .corpus import analytic_corpus
    from .family import QuinticCurve
    from .kummer import duplication_raw

    rng = random.Random(seed)
    curves = analytic_corpus()

    # C_arch: worst |lambda_inf(2K) - 4 lambda_inf(K)| - 12 h(f) over a fuzz
    # corpus of random normalized tuples, frozen with a 2x margin.
    worst_arch = 1.0
    fuzz_curves = [
        QuinticCurve(*coeffs)
        for coeffs in _fuzz_coeffs(rng, 60)
    ]
    with mp.workprec(precision_bits):
        for curve in fuzz_curves + curves:
            for _ in range(16):
                k = [mp.mpf(rng.uniform(-1, 1)) for _ in range(4)]
                m = max(abs(v) for v in k)
                k = [v / m for v in k]
                d = duplication_raw(curve, k)
                md = max(abs(v) for v in d)
                if md == 0:
                    continue
                diff = abs(mp.log(md)) - 12 * curve.h_f
                worst_arch = max(worst_arch, float(diff))
    out = {"c_arch": 2.0 * worst_arch}

    # |Delta_f| <= C * H(f)^20 over the corpus, frozen with a 2x margin.
    worst_delta = max(
        abs(c.delta_f) / c.height_H**20 for c in fuzz_curves + curves
    )
    out["delta_h20_c"] = 2.0 * worst_delta

    # Theta-side constants need period data.  Bound fitting is done at low
    # precision (the constants have one-digit accuracy targets); only the
    # Igusa ratio keeps the full working precision.
    sample_bits = 64
    xi_max = 0.0
    im_tau1_excess = -math.inf
    near_zero_lo, near_zero_hi = math.inf, 0.0
    ratios = []
    for curve in curves:
        rdata = analytic.compute_periods(curve, precision_bits)
        with mp.workprec(precision_bits):
            tau = rdata.tau
            y = analytic._im_matrix(tau)

            def domain_point(spread):
                a = (mp.mpf(rng.uniform(-spread, spread)),
                     mp.mpf(rng.uniform(-spread, spread)))
                b = (mp.mpf(rng.uniform(-spread, spread)),
                     mp.mpf(rng.uniform(-spread, spread)))
                return mp.matrix(
                    [a[0] + tau[0, 0] * b[0] + tau[0, 1] * b[1],
                     a[1] + tau[1, 0] * b[0] + tau[1, 1] * b[1]]
                )

            for _ in range(1000 // len(curves) + 20):
                z = domain_point(0.5)
                for char in analytic.ALL_CHARACTERISTICS:
                    xi_max = max(
                        xi_max, float(analytic.xi(char, z, tau, precision_bits=sample_bits))
                    )
            for char, rate in analytic.NEAR_ZERO_DECAY_CLASSES:
                for _ in range(6):
                    z = domain_point(0.01)
                    ratio = float(
                        abs(analytic.theta(char, z, tau, precision_bits=sample_bits))
                        / mp.e ** (-mp.pi * rate(y) / 4)
                    )
                    near_zero_lo = min(near_zero_lo, ratio)
                    near_zero_hi = max(near_zero_hi, ratio)
            im_tau1_excess = max(
                im_tau1_excess,
                float(y[0, 0])
                - (10 / math.pi) * curve.h_f
                + math.log(abs(curve.delta_f)) / (3 * math.pi),
            )
            from .corpus import has_generic_igusa

            if has_generic_igusa(curve):
                ratios.append(
                    complex(analytic.igusa_i3(curve, "roots", precision_bits=precision_bits))
                    / complex(analytic.igusa_i3(curve, "thetas", rdata=rdata))
                )
    out["c_xi"] = 2.0 * xi_max
    out["theta_near_zero_c"] = 2.0 * max(near_zero_hi, 1.0 / near_zero_lo)
    out["im_tau1_c_fit"] = im_tau1_excess + 1.0
    mean = sum(ratios) / len(ratios)
    out["i3_ratio"] = [mean.real, mean.imag]
    out["i3_ratio_spread"] = max(abs(r - mean) / abs(mean) for r in ratios)

    # hhat/h_K comparability band over searched points with h_K >= 16 h(f);
    # monitored statistic only.
    from .corpus import height_corpus
    from .heights import height_of_point

    band = 1.0
    for curve, pt in height_corpus():
        res = height_of_point(curve, pt, precision_bits=128, target_error=1e-6)
        hk = 2 * math.log(pt.height_H) if pt.height_H > 1 else 0.0
        if hk >= 16 * curve.h_f and hk > 0 and res.value > res.error_radius:
            band = max(band, res.value / hk, hk / res.value)
    out["mu_hat"] = 2.0 * band

    out["corpus"] = {
        "analytic_curves": [c.coeffs() for c in curves],
        "seed": seed,
        "precision_bits": precision_bits,
    }
    return out


def _fuzz_coeffs(rng, n: int):
    out = []
    while len(out) < n:
        coeffs = tuple(rng.randint(-(3**i), 3**i) for i in (2, 3, 4, 5))
        from .family import disc_fast

        if disc_fast(*coeffs) != 0:
            out.append(coeffs)
    return out
