"""Point partition, gap-principle verification and cluster repulsion audits.

Points split into small (I), medium (II) and large (III) classes by the
height thresholds, with arrows recording whether |x| is unusually large
(>= delta^(-1/delta) H), unusually small (<= delta^(1/delta) H), or neither,
plus the finer fundamental-domain cell, closest-distinguished-root and
height-band refinements.  Pairs inside one full label must repel:
cos(theta) <= 0.6334 for the up-case, <= 0.6737 otherwise (medium), and
<= 1/2 for comparable large points; at desk scale most labels are expected
to be vacuous and the report says so rather than inventing pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import (
    DegenerateGram,
    DomainError,
    MissingAnalytic,
    TorsionOperand,
)
from .family import QuinticCurve, alpha_beta_star
from .heights import Bound, cos_theta, height_of_point
from .points import CurvePoint

C_UP = 25.0 / 3.0
C_DOWN = 8.0
COS_BOUND_UP = 0.6334
COS_BOUND_NORMAL = 0.6737
COS_BOUND_LARGE = 0.5
DEFAULT_SLACK_K = 10.0


@dataclass(frozen=True)
class PartitionLabel:
    cls: str  # "I" | "II" | "III"
    arrow: str  # "up" | "bullet" | "down"
    cell: Optional[tuple] = None
    rho_tag: Optional[str] = None  # "alpha_star" | "beta_star"
    ij_tag: Optional[tuple] = None  # (i, j) for II, (i, None) for III

    def group_key(self):
        return (self.cls, self.arrow, self.cell, self.rho_tag, self.ij_tag)


def thresholds(curve: QuinticCurve, delta: float) -> dict:
    """All delta-derived cutoffs for one curve, computed once."""
    if not 0 < delta < 1:
        raise DomainError("delta must be in (0, 1)")
    H = curve.height_H
    h = curve.h_f
    return {
        "x_big": delta ** (-1.0 / delta) * H,
        "x_small": delta ** (1.0 / delta) * H,
        "h_small_up": (C_UP - delta) * h,
        "h_small_down": (C_DOWN - delta) * h,
        "h_medium": delta ** (-1.0 / delta) * h,
    }


def _band_index(ratio: float, delta: float) -> int:
    if ratio <= 0:
        return 0  # torsion / zero-height convention, keeps labels total
    return math.floor(math.log(ratio) / math.log1p(delta))


def classify(
    curve: QuinticCurve,
    point: CurvePoint,
    delta: float,
    rdata=None,
    require_cell: bool = False,
    height_result=None,
    precision_bits: int = 128,
) -> PartitionLabel:
    """Full partition label of an affine point.

    The cell needs Riemann data (MissingAnalytic if required without it);
    the height bands need the canonical height, computed on demand unless a
    precomputed result is passed in.
    """
    if point.is_infinity:
        raise ValueError("partition is defined for affine points")
    th = thresholds(curve, delta)
    x_abs = abs(float(point.x))
    hP = point.h

    x_up = x_abs >= th["x_big"]
    x_down = x_abs <= th["x_small"]
    if x_up:
        arrow = "up"
    elif x_down:
        arrow = "down"
    else:
        arrow = "bullet"

    if x_up and hP < th["h_small_up"]:
        cls = "I"
    elif not x_up and hP < th["h_small_down"]:
        cls, arrow = "I", "down"  # small points carry no bullet decoration
    elif hP < th["h_medium"]:
        cls = "II"
    else:
        cls = "III"

    alpha, beta = alpha_beta_star(curve, precision_bits)
    x_val = float(point.x)
    rho_tag = "alpha_star" if abs(x_val - alpha) <= abs(x_val - beta) else "beta_star"

    cell = None
    if cls in ("II", "III"):
        if rdata is not None:
            n_cells = max(1, round(1.0 / delta))
            z = rdata.abel_jacobi(point)
            _, a0, b0 = rdata.z_lift(z)
            cell = tuple(
                math.floor(2 * n_cells * float(v)) for v in (a0[0], a0[1], b0[0], b0[1])
            )
        elif require_cell:
            raise MissingAnalytic("cell assignment needs Riemann data")

    ij_tag = None
    if cls in ("II", "III"):
        if height_result is None:
            height_result = height_of_point(
                curve, point, precision_bits=precision_bits, target_error=1e-8
            )
        hk = 2 * hP
        hhat = height_result.value
        i = _band_index(hhat / hk, delta) if hk > 0 else 0
        if cls == "II":
            j = _band_index(hk / curve.h_f, delta) if curve.h_f > 0 else 0
            ij_tag = (i, j)
        else:
            ij_tag = (i, None)

    return PartitionLabel(cls=cls, arrow=arrow, cell=cell, rho_tag=rho_tag, ij_tag=ij_tag)


def _same_x(p: CurvePoint, q: CurvePoint) -> bool:
    return p.s * q.e**2 == q.s * p.e**2


def verify_gap_pairs(
    curve: QuinticCurve,
    labeled_points: Sequence[tuple[CurvePoint, PartitionLabel]],
    delta: float,
    slack_k: float = DEFAULT_SLACK_K,
    cos_fn: Optional[Callable[[CurvePoint, CurvePoint], Bound]] = None,
    height_fn: Optional[Callable[[CurvePoint], Bound]] = None,
) -> dict:
    """Check the repulsion bounds on every qualifying same-label pair.

    The up-label bound applies only to pairs normalized to y >= 0; large
    labels additionally require comparable canonical heights.  Zero
    qualifying pairs is the expected desk-scale outcome and is flagged as
    vacuous, never as a failure.
    """
    if cos_fn is None:
        cos_fn = lambda p, q: cos_theta(curve, p, q)  # noqa: E731
    if height_fn is None:
        height_fn = lambda p: height_of_point(curve, p).as_bound()  # noqa: E731

    groups: dict = {}
    for point, label in labeled_points:
        if label.cls in ("II", "III"):
            groups.setdefault(label.group_key(), []).append((point, label))

    report = {"labels": {}, "total_checked": 0, "all_pass": True}
    for key, members in sorted(groups.items(), key=lambda kv: repr(kv[0])):
        cls, arrow = key[0], key[1]
        if cls == "II":
            bound = COS_BOUND_UP if arrow == "up" else COS_BOUND_NORMAL
        else:
            bound = COS_BOUND_LARGE
        allowed = bound + slack_k * delta
        checked = 0
        violations = []
        min_margin = None
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                p, q = members[i][0], members[j][0]
                if _same_x(p, q):
                    continue  # P = +-Q is excluded by the lemma hypotheses
                if arrow == "up" and (p.t < 0 or q.t < 0):
                    continue
                if cls == "III":
                    hp, hq = height_fn(p), height_fn(q)
                    if hp.value <= 0 or hq.value <= 0:
                        continue
                    if abs(hp.value / hq.value - 1) > slack_k * delta:
                        continue
                try:
                    value = cos_fn(p, q)
                except TorsionOperand:
                    continue
                checked += 1
                margin = allowed - (value.value - value.radius)
                min_margin = margin if min_margin is None else min(min_margin, margin)
                if value.value - value.radius > allowed:
                    violations.append(
                        {
                            "pair": [p.to_json_dict(), q.to_json_dict()],
                            "cos": value.value,
                            "bound": allowed,
                        }
                    )
        report["labels"][repr(key)] = {
            "bound": bound,
            "allowed": allowed,
            "members": len(members),
            "checked": checked,
            "violations": violations,
            "min_margin": min_margin,
            "vacuous": checked == 0,
        }
        report["total_checked"] += checked
        if violations:
            report["all_pass"] = False
    return report


def _cos_from_gram(gram, i: int, j: int, tol: float = 1e-12) -> float:
    gii, gjj = gram[i][i], gram[j][j]
    if gii <= tol or gjj <= tol:
        raise DegenerateGram(f"zero norm at index {i if gii <= tol else j}")
    return gram[i][j] / math.sqrt(gii * gjj)


def greedy_separated_subset(gram: Sequence[Sequence[float]], alpha: float) -> list[int]:
    """Greedy maximal index set with pairwise cos(theta) <= alpha.

    Scanning in index order makes the output a deterministic function of the
    Gram matrix; maximality means every excluded index has a blocker in the
    output with cos(theta) > alpha.
    """
    if not -1 < alpha < 1:
        raise DomainError("alpha must be in (-1, 1)")
    chosen: list[int] = []
    for i in range(len(gram)):
        if all(_cos_from_gram(gram, i, s) <= alpha for s in chosen):
            chosen.append(i)
    return chosen


def cluster_repulsion_audit(
    gram: Sequence[Sequence[float]],
    alpha: float,
    delta: float,
    center: int,
    slack_k: float = DEFAULT_SLACK_K,
) -> dict:
    """Audit the repulsion geometry of the cluster around one center.

    Members are the indices with cos(theta, center) > alpha.  After dropping
    the member with minimal |v_P| (v_P = P/|P| - Q/|Q|), every remaining pair
    must satisfy <v_P, v_P'> < -2 sqrt(delta) + K delta; the implied
    cardinality bound m <= 1 + 1/c with c = min pairwise -cos(theta_v) is the
    O(delta^(-1/2)) cluster-size bound, reported alongside.
    """
    if not 0 < delta < 1:
        raise DomainError("delta must be in (0, 1)")
    n = len(gram)
    members = [
        i for i in range(n) if i != center and _cos_from_gram(gram, i, center) > alpha
    ]
    report = {
        "center": center,
        "members": members,
        "dropped": None,
        "pairs": [],
        "passes": True,
        "vacuous": False,
        "count_bound": None,
        "threshold": -2 * math.sqrt(delta) + slack_k * delta,
    }
    if len(members) <= 1:
        report["vacuous"] = True
        return report

    def vnorm2(i):
        return 2 - 2 * _cos_from_gram(gram, i, center)

    dropped = min(members, key=lambda i: (vnorm2(i), i))
    rest = [i for i in members if i != dropped]
    report["dropped"] = dropped
    if len(rest) <= 1:
        report["vacuous"] = True
        return report

    worst_cos_v = -math.inf
    for a_i in range(len(rest)):
        for b_i in range(a_i + 1, len(rest)):
            i, j = rest[a_i], rest[b_i]
            inner = (
                1
                - _cos_from_gram(gram, i, center)
                - _cos_from_gram(gram, j, center)
                + _cos_from_gram(gram, i, j)
            )
            ok = inner < report["threshold"]
            cos_v = inner / math.sqrt(vnorm2(i) * vnorm2(j))
            worst_cos_v = max(worst_cos_v, cos_v)
            report["pairs"].append({"pair": [i, j], "inner": inner, "ok": ok})
            if not ok:
                report["passes"] = False
    if worst_cos_v < 0:
        report["count_bound"] = 1 + math.floor(1 / -worst_cos_v)
    return report
