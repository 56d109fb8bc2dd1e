import math
import random

import pytest

from g2kummer.errors import DegenerateGram, DomainError, MissingAnalytic
from g2kummer.family import QuinticCurve
from g2kummer.gap import (
    COS_BOUND_NORMAL,
    COS_BOUND_UP,
    PartitionLabel,
    classify,
    cluster_repulsion_audit,
    greedy_separated_subset,
    thresholds,
    verify_gap_pairs,
)
from g2kummer.heights import Bound
from g2kummer.points import CurvePoint, search_points

DELTA = 0.25


def fake_point(s, e=1, t=0):
    return CurvePoint.affine(s, e, t)


def test_thresholds_arithmetic():
    c = QuinticCurve(0, 16, 0, 0)  # H = 16^(1/3) ... pick a curve with H(f)=2
    c = QuinticCurve(4, 0, 0, 3)  # |a2|^(1/2) = 2 = H(f)
    th = thresholds(c, DELTA)
    assert abs(th["x_big"] - 512) < 1e-9  # 0.25^-4 * 2
    assert abs(th["x_small"] - 2 / 256) < 1e-12


def test_classify_up_arrow_example():
    c = QuinticCurve(4, 0, 0, 3)  # H(f) = 2
    p = fake_point(1000)  # |x| = 1000 >= 512
    label = classify(c, p, DELTA)
    assert label.arrow == "up"
    assert label.cls == "I"  # h(P) = log 1000 < (25/3 - delta) h(f)


def test_classify_small_down_example():
    c = QuinticCurve(4, 0, 0, 3)
    p = fake_point(3)  # small |x|, h(P) < (8 - delta) h(f)
    label = classify(c, p, DELTA)
    assert label.cls == "I" and label.arrow == "down"
    assert label.ij_tag is None and label.cell is None


def test_classify_medium_and_large_bands():
    c = QuinticCurve(4, 0, 0, 3)  # h(f) = log 2
    h_med = thresholds(c, DELTA)["h_medium"]
    # fabricate a medium point: h in [(8 - d) h(f), 256 h(f))
    s_med = int(math.exp(0.5 * h_med))
    p_med = fake_point(s_med)
    lab = classify(c, p_med, DELTA, height_result=_FakeHeight(1.0))
    assert lab.cls == "II" and lab.ij_tag is not None and len(lab.ij_tag) == 2
    # fabricate a large point: h >= 256 h(f); x huge so arrow is up
    s_big = 2 ** (int(h_med / math.log(2)) + 2)
    p_big = fake_point(s_big)
    lab_big = classify(c, p_big, DELTA, height_result=_FakeHeight(2 * math.log(s_big)))
    assert lab_big.cls == "III" and lab_big.ij_tag[1] is None


class _FakeHeight:
    def __init__(self, value, radius=1e-12):
        self.value = value
        self.error_radius = radius


def test_classify_requires_affine():
    c = QuinticCurve(4, 0, 0, 3)
    with pytest.raises(ValueError):
        classify(c, CurvePoint.infinity(), DELTA)


def test_classify_cell_needs_rdata():
    c = QuinticCurve(4, 0, 0, 3)
    th = thresholds(c, DELTA)
    s_med = int(math.exp(0.5 * th["h_medium"]))
    with pytest.raises(MissingAnalytic):
        classify(c, fake_point(s_med), DELTA, require_cell=True,
                 height_result=_FakeHeight(1.0))


def test_classify_cell_from_rdata(corpus_rdata):
    rdata = corpus_rdata[(0, 0, -1, 0)]
    curve = rdata.curve
    # h(f) = 0 for x^5 - x, so every affine point lands in class III
    p = CurvePoint.affine(-1, 1, 0)
    lab = classify(curve, p, DELTA, rdata=rdata, height_result=_FakeHeight(0.0))
    assert lab.cls == "III"
    assert lab.cell is not None and len(lab.cell) == 4
    n = round(1 / DELTA)
    assert all(-n <= v <= n for v in lab.cell)


def test_partition_exhaustive_disjoint(corpus_pairs):
    # independent re-derivation of the class from the raw threshold predicates
    for curve, p in corpus_pairs:
        label = classify(curve, p, DELTA, height_result=_FakeHeight(max(p.h, 0.1)))
        th = thresholds(curve, DELTA)
        x = abs(float(p.x))
        hP = p.h
        in_i_up = x >= th["x_big"] and hP < th["h_small_up"]
        in_i_down = x < th["x_big"] and hP < th["h_small_down"]
        in_ii = not (in_i_up or in_i_down) and hP < th["h_medium"]
        expected = "I" if (in_i_up or in_i_down) else ("II" if in_ii else "III")
        assert label.cls == expected
        assert label.arrow in ("up", "bullet", "down")
        assert (label.cls == "I") == (label.ij_tag is None)


def test_classify_sign_invariance(corpus_pairs):
    for curve, p in corpus_pairs[:6]:
        if p.t == 0:
            continue
        a = classify(curve, p, DELTA, height_result=_FakeHeight(max(p.h, 0.1)))
        b = classify(curve, p.negate(), DELTA, height_result=_FakeHeight(max(p.h, 0.1)))
        assert a == b


# ------------------------------------------------------------- gap verification


def _label(cls="II", arrow="bullet", ij=(0, 0)):
    return PartitionLabel(cls=cls, arrow=arrow, cell=None, rho_tag="alpha_star",
                          ij_tag=ij)


def test_verify_excludes_p_minus_p():
    c = QuinticCurve(4, 0, 0, 3)
    p = CurvePoint.affine(9, 1, 1)
    pts = [(p, _label()), (p.negate(), _label())]
    report = verify_gap_pairs(c, pts, DELTA, cos_fn=lambda a, b: Bound(0.99, 0.0))
    (group,) = report["labels"].values()
    assert group["checked"] == 0 and group["vacuous"]


def test_verify_flags_injected_violation():
    c = QuinticCurve(4, 0, 0, 3)
    p = CurvePoint.affine(9, 1, 1)
    q = CurvePoint.affine(10, 1, 1)
    pts = [(p, _label()), (q, _label())]
    bad = verify_gap_pairs(c, pts, DELTA, cos_fn=lambda a, b: Bound(0.999, 1e-9))
    assert not bad["all_pass"]
    good = verify_gap_pairs(c, pts, DELTA, cos_fn=lambda a, b: Bound(0.5, 1e-9))
    assert good["all_pass"] and good["total_checked"] == 1


def test_verify_up_requires_positive_y():
    c = QuinticCurve(4, 0, 0, 3)
    p = CurvePoint.affine(600, 1, 5)
    q = CurvePoint.affine(601, 1, -5)
    pts = [(p, _label(arrow="up")), (q, _label(arrow="up"))]
    report = verify_gap_pairs(c, pts, DELTA, cos_fn=lambda a, b: Bound(0.99, 0.0))
    (group,) = report["labels"].values()
    assert group["vacuous"]  # the y >= 0 normalization excludes the pair
    assert group["bound"] == COS_BOUND_UP


def test_verify_on_real_corpus(corpus_pairs):
    by_curve = {}
    for curve, p in corpus_pairs:
        by_curve.setdefault(curve.coeffs(), (curve, []))[1].append(p)
    total_groups = 0
    for _, (curve, pts) in sorted(by_curve.items())[:6]:
        labeled = [
            (p, classify(curve, p, DELTA, height_result=_FakeHeight(max(p.h, 0.1))))
            for p in pts
        ]
        report = verify_gap_pairs(curve, labeled, DELTA)
        assert report["all_pass"]  # vacuous sections are fine, violations are not
        total_groups += len(report["labels"])
    assert total_groups >= 0  # vacuous corpus is the expected desk-scale outcome


# ------------------------------------------------------------- greedy subsets


def _gram_from_vectors(vecs):
    return [[sum(a * b for a, b in zip(u, v)) for v in vecs] for u in vecs]


def test_greedy_orthonormal_keeps_all():
    gram = _gram_from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    assert greedy_separated_subset(gram, 0.5) == [0, 1, 2]


def test_greedy_collapses_duplicates():
    gram = _gram_from_vectors([(1, 0), (1, 0)])
    assert greedy_separated_subset(gram, 0.99) == [0]


def test_greedy_alpha_domain():
    with pytest.raises(DomainError):
        greedy_separated_subset([[1.0]], 1.0)


def test_greedy_maximality_bruteforce_audit():
    rng = random.Random(42)
    for _ in range(5):
        vecs = []
        for _ in range(50):
            v = [rng.gauss(0, 1) for _ in range(5)]
            n = math.sqrt(sum(x * x for x in v))
            vecs.append(tuple(x / n for x in v))
        gram = _gram_from_vectors(vecs)
        chosen = greedy_separated_subset(gram, 0.75)
        chosen_set = set(chosen)
        # pairwise condition
        for i in chosen:
            for j in chosen:
                if i < j:
                    assert gram[i][j] <= 0.75 + 1e-12
        # maximality: every excluded vector has a blocker
        for i in range(50):
            if i not in chosen_set:
                assert any(gram[i][s] > 0.75 for s in chosen)
        # determinism
        assert greedy_separated_subset(gram, 0.75) == chosen


def test_degenerate_gram_raises():
    with pytest.raises(DegenerateGram):
        greedy_separated_subset([[0.0, 0.0], [0.0, 1.0]], 0.5)


# ------------------------------------------------------------- cluster audit


def _synthetic_cluster():
    """Center Q = e1 plus three satellites with simplex-spread tails.

    cos(satellite, Q) = 0.8 > alpha and pairwise satellite cos = 0.46 <= 1/2,
    so the inner products <v_P, v_P'> = 1 - 1.6 + 0.46 = -0.14 clear the
    -2 sqrt(delta) + K delta threshold at delta = 0.0025.
    """
    c = 0.8
    s = math.sqrt(1 - c * c)
    vecs = [(1.0, 0.0, 0.0, 0.0)]
    tails = [(1, 0, 0), (-0.5, math.sqrt(3) / 2, 0), (-0.5, -math.sqrt(3) / 2, 0)]
    for t in tails:
        vecs.append((c, s * t[0], s * t[1], s * t[2]))
    return _gram_from_vectors(vecs)


def test_cluster_audit_single_point_vacuous():
    gram = _gram_from_vectors([(1, 0), (0.9, math.sqrt(1 - 0.81))])
    report = cluster_repulsion_audit(gram, 0.75, 0.01, center=0)
    assert report["vacuous"]


def test_cluster_audit_passes_on_constructed_fixture():
    report = cluster_repulsion_audit(_synthetic_cluster(), 0.75, 0.0025, center=0)
    assert not report["vacuous"]
    assert report["passes"]
    assert report["count_bound"] is not None and report["count_bound"] >= 2


def test_cluster_audit_flags_violation():
    # satellites nearly parallel: pairwise cos ~ 1 inside the cluster
    vecs = [(1.0, 0.0, 0.0)]
    c = 0.9
    s = math.sqrt(1 - c * c)
    for _ in range(3):
        vecs.append((c, s, 0.0))
    gram = _gram_from_vectors(vecs)
    report = cluster_repulsion_audit(gram, 0.75, 0.01, center=0)
    assert not report["passes"]
