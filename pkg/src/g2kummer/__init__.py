"""Kummer-surface arithmetic, canonical heights and gap verification for
the genus-2 family y^2 = x^5 + a2*x^3 + a3*x^2 + a4*x + a5."""

from .family import QuinticCurve, discriminant, enumerate_family
from .points import CurvePoint, is_on_curve, search_points
from .kummer import KummerCoords, double_coords, kappa, sum_and_diff_coords
from .heights import CanonicalHeightResult, canonical_height, cos_theta, pairing

__all__ = [
    "QuinticCurve",
    "discriminant",
    "enumerate_family",
    "CurvePoint",
    "is_on_curve",
    "search_points",
    "KummerCoords",
    "kappa",
    "double_coords",
    "sum_and_diff_coords",
    "CanonicalHeightResult",
    "canonical_height",
    "pairing",
    "cos_theta",
]

__version__ = "0.1.0"
