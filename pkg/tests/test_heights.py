import math

import pytest

from g2kummer.errors import InfinityPoint, TorsionOperand
from g2kummer.family import QuinticCurve
from g2kummer.heights import (
    bad_primes,
    canonical_height,
    cos_theta,
    height_of_point,
    lambda_inf_telescoped,
    naive_hK,
    naive_height_x,
    pairing,
    stoll_cap,
)
from g2kummer.kummer import KummerCoords, double_coords, kappa, sum_and_diff_coords
from g2kummer.points import CurvePoint, search_points

from oracles import exact_telescoped_height


def test_naive_heights():
    assert abs(naive_height_x(CurvePoint.affine(1, 2, 5)) - math.log(4)) < 1e-15
    assert naive_height_x(CurvePoint.affine(-1, 1, 0)) == 0.0
    assert abs(naive_height_x(CurvePoint.affine(7, 3, 1)) - math.log(9)) < 1e-15
    with pytest.raises(InfinityPoint):
        naive_height_x(CurvePoint.infinity())

    assert abs(naive_hK(KummerCoords(0, 16, 4, 1)) - math.log(16)) < 1e-15
    assert naive_hK(KummerCoords(0, 0, 0, 1)) == 0.0


def test_naive_hK_is_twice_point_height(corpus_pairs):
    for _, p in corpus_pairs:
        assert abs(naive_hK(kappa(p)) - 2 * naive_height_x(p)) < 1e-12


def test_two_torsion_height_is_zero():
    c = QuinticCurve(0, 0, 0, 1)
    res = canonical_height(c, kappa(CurvePoint.affine(-1, 1, 0)))
    assert abs(res.value) <= max(res.error_radius, 1e-6)


def test_torsion_point_matches_long_telescoping_oracle():
    # kappa((0,1)) on x^5+1 has a periodic exact orbit; the defining limit
    # h_K(2^n P)/4^n can therefore be run out to n >= 20 exactly
    c = QuinticCurve(0, 0, 0, 1)
    K = kappa(CurvePoint.affine(0, 1, 1))
    oracle, n = exact_telescoped_height(c, K, n_steps=22)
    assert n >= 20
    res = canonical_height(c, K)
    assert abs(res.value - oracle) < 1e-6
    assert abs(res.value) < 1e-6  # the orbit is finite: a torsion class


def test_correction_budget_identity(corpus_pairs):
    # value = naive + mu_inf + sum_p mu_p within the error radius
    for curve, p in corpus_pairs[:8]:
        res = height_of_point(curve, p)
        total = res.naive + res.archimedean_correction + sum(
            res.prime_corrections.values()
        )
        assert abs(res.value - total) <= res.error_radius + 1e-12
        assert res.value >= -res.error_radius


def test_doubling_relation(corpus_pairs):
    for curve, p in corpus_pairs[:10]:
        K = kappa(p)
        r1 = canonical_height(curve, K)
        r2 = canonical_height(curve, double_coords(curve, K))
        assert abs(r2.value - 4 * r1.value) <= r2.error_radius + 4 * r1.error_radius


def test_stoll_bounds(corpus_pairs):
    for curve, p in corpus_pairs:
        res = height_of_point(curve, p)
        for q, mu in res.prime_corrections.items():
            assert abs(mu) <= stoll_cap(curve, q) * math.log(q) / 3 + 1e-9
        # global bound: sum_p |mu_p| <= (1/3) log|Delta| + (4/3) log 2
        assert sum(abs(v) for v in res.prime_corrections.values()) <= (
            math.log(abs(curve.delta_f)) / 3 + 4 * math.log(2) / 3 + 1e-9
        )


def test_bad_prime_support():
    c = QuinticCurve(0, 0, 0, 1)  # disc = 5^5, Delta = 2^8 5^5
    assert bad_primes(c) == [2, 5]
    assert stoll_cap(c, 2) == 12 and stoll_cap(c, 5) == 5


def test_parallelogram_law(corpus_point_pairs):
    checked = 0
    for curve, p, q in corpus_point_pairs[:8]:
        ks, kd = sum_and_diff_coords(curve, p, q)
        hs = canonical_height(curve, ks)
        hd = canonical_height(curve, kd)
        hp = height_of_point(curve, p)
        hq = height_of_point(curve, q)
        lhs = hs.value + hd.value
        rhs = 2 * hp.value + 2 * hq.value
        rad = hs.error_radius + hd.error_radius + 2 * hp.error_radius + 2 * hq.error_radius
        assert abs(lhs - rhs) <= rad + 1e-9
        checked += 1
    assert checked >= 5


def test_pairing_diagonal_is_height(corpus_pairs):
    for curve, p in corpus_pairs[:4]:
        hp = height_of_point(curve, p)
        pr = pairing(curve, p, p)
        assert abs(pr.value - hp.value) <= pr.radius + hp.error_radius + 1e-9


def test_pairing_sign_symmetry(corpus_point_pairs):
    # <P, Q> computed on the sum member equals -<P, -Q> (bilinearity)
    for curve, p, q in corpus_point_pairs[:4]:
        a = pairing(curve, p, q)
        b = pairing(curve, p, q.negate())
        assert abs(a.value + b.value) <= a.radius + b.radius + 1e-9


def test_translation_by_two_torsion_preserves_height():
    # y^2 = x^5 + x^3 + 2x has the rational 2-torsion point (0,0) and the
    # nontorsion point (1, 2); translating by torsion must preserve hhat
    c = QuinticCurve(1, 0, 2, 0)
    P = CurvePoint.affine(1, 1, 2)
    Q = CurvePoint.affine(0, 1, 0)
    hq = height_of_point(c, Q)
    assert abs(hq.value) <= max(hq.error_radius, 1e-6)
    ksum, kdiff = sum_and_diff_coords(c, P, Q)
    hp = height_of_point(c, P)
    for member in (ksum, kdiff):
        hm = canonical_height(c, member)
        assert abs(hm.value - hp.value) <= hm.error_radius + hp.error_radius + 1e-6


def test_cos_theta_diagonals():
    c = QuinticCurve(1, 0, 2, 0)
    P = CurvePoint.affine(1, 1, 2)
    same = cos_theta(c, P, P)
    assert abs(same.value - 1) <= same.radius + 1e-6
    opp = cos_theta(c, P, P.negate())
    assert abs(opp.value + 1) <= opp.radius + 1e-6


def test_cos_theta_rejects_torsion():
    c = QuinticCurve(0, 0, 0, 1)
    P = CurvePoint.affine(0, 1, 1)  # torsion class
    Q = CurvePoint.affine(-1, 1, 0)
    with pytest.raises(TorsionOperand):
        cos_theta(c, P, Q)


def test_cos_theta_in_range(corpus_point_pairs):
    seen = 0
    for curve, p, q in corpus_point_pairs:
        try:
            v = cos_theta(curve, p, q)
        except TorsionOperand:
            continue
        assert -1 - v.radius <= v.value <= 1 + v.radius
        seen += 1
    assert seen >= 1


def test_height_comparability_monitored(corpus_pairs):
    from g2kummer.calibration import frozen_constants

    band = frozen_constants()["mu_hat"]
    for curve, p in corpus_pairs:
        res = height_of_point(curve, p)
        hk = naive_hK(kappa(p))
        if hk >= 16 * curve.h_f and hk > 0 and res.value > res.error_radius:
            ratio = res.value / hk
            assert 1 / band <= ratio <= band


def test_error_radius_shrinks_with_target():
    c = QuinticCurve(1, 0, 2, 0)
    K = kappa(CurvePoint.affine(1, 1, 2))
    loose = canonical_height(c, K, target_error=1e-4)
    tight = canonical_height(c, K, target_error=1e-10)
    assert tight.error_radius < loose.error_radius
    assert loose.error_radius < 1e-4 and tight.error_radius < 1e-10
    assert abs(loose.value - tight.value) <= loose.error_radius + tight.error_radius


def test_lambda_inf_telescoped_converges():
    c = QuinticCurve(1, 0, 2, 0)
    K = kappa(CurvePoint.affine(1, 1, 2))
    a = lambda_inf_telescoped(c, K, 128, 20)
    b = lambda_inf_telescoped(c, K, 192, 30)
    assert abs(a.value - b.value) <= a.radius + b.radius


def test_result_json_shape():
    c = QuinticCurve(0, 0, 0, 1)
    res = canonical_height(c, kappa(CurvePoint.affine(0, 1, 1)))
    rec = res.to_json_dict()
    assert set(rec) == {"value", "err", "mu_inf", "mu_p", "n"}
    assert set(rec["mu_p"]) == {"2", "5"}
