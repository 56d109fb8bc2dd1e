"""Period matrices, theta functions, and the Archimedean local height.

The pipeline per curve:

1. integrate (dx/y, x dx/y) over loops around consecutive branch points of a
   non-crossing chain through the five roots (loop = twice the path integral
   between the two points, with the square-root branch continued along the
   path);
2. pick the chain's intersection signs by filtering the eight tridiagonal
   candidates through the Riemann relations (tau symmetric, Im tau > 0) after
   an integral symplectic change of basis;
3. Siegel-reduce the frame by translations, Lagrange reduction of Im tau and
   tau1-corner inversions;
4. match the Abel-Jacobi images of the Weierstrass points to half-periods,
   which assigns the odd theta characteristics;
5. evaluate the canonical local height at infinity through the damped theta
   function Xi and the linear forms ell_rho, with the constant c_rho given by
   theta constants (Thomae).

Everything here is numerical but certified operationally: characteristic
assignment must land on half-periods to 1e-6, theta vanishing is checked,
and the telescoped local height provides an independent cross-path oracle.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath as mp

from .errors import (
    AmbiguousMatch,
    EvenThetaVanishes,
    NonConvergence,
    OnDivisor,
    PathDegeneracy,
    ReductionStall,
)
from .family import QuinticCurve, complex_roots
from .points import CurvePoint

REDUCTION_SLACK = 1e-9
CHAR_MATCH_TOL = 1e-6
_MAX_SWEEPS = 64


# --------------------------------------------------------------------------
# theta characteristics
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Pair (a, b) in {0, 1/2}^2 x {0, 1/2}^2, stored in half-units."""

    a1: int
    a2: int
    b1: int
    b2: int

    def __post_init__(self):
        for v in (self.a1, self.a2, self.b1, self.b2):
            if v not in (0, 1):
                raise ValueError("characteristic entries live in {0, 1/2}")

    @property
    def parity(self) -> int:
        return (self.a1 * self.b1 + self.a2 * self.b2) % 2

    @property
    def is_even(self) -> bool:
        return self.parity == 0

    def __add__(self, other: "ThetaCharacteristic") -> "ThetaCharacteristic":
        return ThetaCharacteristic(
            (self.a1 + other.a1) % 2,
            (self.a2 + other.a2) % 2,
            (self.b1 + other.b1) % 2,
            (self.b2 + other.b2) % 2,
        )

    def a_vec(self):
        return (mp.mpf(self.a1) / 2, mp.mpf(self.a2) / 2)

    def b_vec(self):
        return (mp.mpf(self.b1) / 2, mp.mpf(self.b2) / 2)

    def half_period(self, tau):
        """chi~ = chi_b + tau * chi_a."""
        a, b = self.a_vec(), self.b_vec()
        return mp.matrix(
            [b[0] + tau[0, 0] * a[0] + tau[0, 1] * a[1],
             b[1] + tau[1, 0] * a[0] + tau[1, 1] * a[1]]
        )


ALL_CHARACTERISTICS = tuple(
    ThetaCharacteristic(*bits) for bits in itertools.product((0, 1), repeat=4)
)
EVEN_CHARACTERISTICS = tuple(c for c in ALL_CHARACTERISTICS if c.is_even)
ODD_CHARACTERISTICS = tuple(c for c in ALL_CHARACTERISTICS if not c.is_even)

#: The characteristic whose theta divisor is the Abel-Jacobi image itself.
CHI_INFINITY = ThetaCharacteristic(1, 1, 0, 1)


def _char_vectors(char):
    """Accept a ThetaCharacteristic or a raw ((a1,a2),(b1,b2)) pair."""
    if isinstance(char, ThetaCharacteristic):
        return char.a_vec(), char.b_vec()
    a, b = char
    return (mp.mpf(a[0]), mp.mpf(a[1])), (mp.mpf(b[0]), mp.mpf(b[1]))


def _im_matrix(tau):
    return mp.matrix([[tau[0, 0].imag, tau[0, 1].imag],
                      [tau[1, 0].imag, tau[1, 1].imag]])


def _lambda_min_2x2(y) -> mp.mpf:
    tr = y[0, 0] + y[1, 1]
    det = y[0, 0] * y[1, 1] - y[0, 1] * y[1, 0]
    disc = mp.sqrt(max(tr * tr - 4 * det, mp.mpf(0)))
    return (tr - disc) / 2


def theta(char, Z, tau, precision_bits: Optional[int] = None) -> mp.mpc:
    """Riemann theta with characteristic, truncated with a Gaussian tail bound.

    The lattice sum runs over ||n||_inf <= R where R is chosen from
    lambda_min(Im tau) so the dropped tail is below the working precision;
    raw (unreduced) characteristics are accepted so exact translation
    identities can be tested including their phases.
    """
    prec = precision_bits or mp.mp.prec
    with mp.workprec(prec + 32):
        a, b = _char_vectors(char)
        z = (mp.mpc(Z[0]), mp.mpc(Z[1]))
        y = _im_matrix(tau)
        lam = _lambda_min_2x2(y)
        if lam <= 0:
            raise ValueError("Im tau must be positive definite")
        yinv_iz = mp.lu_solve(y, mp.matrix([z[0].imag, z[1].imag]))
        shift = mp.sqrt((a[0] + yinv_iz[0]) ** 2 + (a[1] + yinv_iz[1]) ** 2)
        R = int(mp.ceil(shift + mp.sqrt(((prec + 32) * mp.log(2) + 16) / (mp.pi * lam)))) + 2
        total = mp.mpc(0)
        for n1 in range(-R, R + 1):
            m1 = n1 + a[0]
            for n2 in range(-R, R + 1):
                m2 = n2 + a[1]
                quad = (
                    tau[0, 0] * m1 * m1
                    + 2 * tau[0, 1] * m1 * m2
                    + tau[1, 1] * m2 * m2
                )
                lin = m1 * (z[0] + b[0]) + m2 * (z[1] + b[1])
                total += mp.e ** (2j * mp.pi * (quad / 2 + lin))
        return total


def xi(char, Z, tau, precision_bits: Optional[int] = None) -> mp.mpf:
    """|theta_chi(Z)| damped by exp(-pi <Im Z, (Im tau)^-1 Im Z>).

    Invariant under translation by the period lattice, hence a function of
    the Kummer class alone.
    """
    y = _im_matrix(tau)
    iz = mp.matrix([mp.mpc(Z[0]).imag, mp.mpc(Z[1]).imag])
    sol = mp.lu_solve(y, iz)
    quad = iz[0] * sol[0] + iz[1] * sol[1]
    return abs(theta(char, Z, tau, precision_bits=precision_bits)) * mp.e ** (
        -mp.pi * quad
    )


#: Characteristic classes with printed near-zero decay rates: |theta(Z)| is
#: comparable to exp(-pi * rate(Im tau) / 4) for Z = A + tau B, ||A||, ||B||
#: small.  rate is in units of the Im tau entries.
NEAR_ZERO_DECAY_CLASSES = (
    (ThetaCharacteristic(0, 0, 0, 0), lambda y: 0 * y[0, 0]),
    (ThetaCharacteristic(1, 0, 0, 0), lambda y: y[0, 0]),
    (ThetaCharacteristic(0, 1, 0, 0), lambda y: y[1, 1]),
    (ThetaCharacteristic(1, 1, 0, 0), lambda y: y[0, 0] + y[1, 1] - 2 * y[0, 1]),
)


# --------------------------------------------------------------------------
# Siegel reduction
# --------------------------------------------------------------------------

_J4 = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))


def _mat_mul_int(a, b):
    n, m, k = len(a), len(b[0]), len(b)
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def _is_sp4(g) -> bool:
    gt = tuple(zip(*g))
    return _mat_mul_int(_mat_mul_int(g, _J4), gt) == _J4


def _lagrange_reduce(y):
    """V in GL2(Z) with V^T y V Lagrange-reduced and off-diagonal >= 0."""
    v = [[1, 0], [0, 1]]

    def gram(i, j):
        ci = (v[0][i], v[1][i])
        cj = (v[0][j], v[1][j])
        return (
            y[0, 0] * ci[0] * cj[0]
            + y[0, 1] * (ci[0] * cj[1] + ci[1] * cj[0])
            + y[1, 1] * ci[1] * cj[1]
        )

    for _ in range(64):
        if gram(0, 0) > gram(1, 1):
            v[0][0], v[0][1] = v[0][1], v[0][0]
            v[1][0], v[1][1] = v[1][1], v[1][0]
        mu = int(mp.nint(gram(0, 1) / gram(0, 0)))
        if mu:
            v[0][1] -= mu * v[0][0]
            v[1][1] -= mu * v[1][0]
        if gram(0, 0) <= gram(1, 1) and 2 * abs(gram(0, 1)) <= gram(0, 0) * (1 + 1e-30):
            break
    if gram(0, 1) < 0:
        v[0][1] = -v[0][1]
        v[1][1] = -v[1][1]
    return v


class _Frame:
    """A symplectic period frame (Omega_A, Omega_B) with move bookkeeping."""

    def __init__(self, pa, pb):
        self.pa = mp.matrix(pa)
        self.pb = mp.matrix(pb)
        self.gamma = tuple(tuple(int(i == j) for j in range(4)) for i in range(4))

    def tau(self):
        return self.pa**-1 * self.pb

    def _apply_cycle_matrix(self, m):
        self.gamma = _mat_mul_int(m, self.gamma)

    def translate(self, s):
        """B_j += sum_i s[i][j] A_i for integer symmetric s."""
        smat = mp.matrix(2, 2)
        for i in range(2):
            for j in range(2):
                smat[i, j] = s[i][j]
        self.pb = self.pb + self.pa * smat
        m = (
            (1, 0, 0, 0),
            (0, 1, 0, 0),
            (s[0][0], s[0][1], 1, 0),
            (s[1][0], s[1][1], 0, 1),
        )
        self._apply_cycle_matrix(m)

    def gl_move(self, w):
        """A' = W A, B' = W^-T B with W in GL2(Z); tau -> W^-T tau W^-1."""
        det = w[0][0] * w[1][1] - w[0][1] * w[1][0]
        if det not in (1, -1):
            raise ValueError("W must be unimodular")
        winv = ((w[1][1] * det, -w[0][1] * det), (-w[1][0] * det, w[0][0] * det))
        wt = mp.matrix([[w[0][0], w[1][0]], [w[0][1], w[1][1]]])
        winv_m = mp.matrix([[winv[0][0], winv[0][1]], [winv[1][0], winv[1][1]]])
        self.pa = self.pa * wt
        self.pb = self.pb * winv_m
        m = (
            (w[0][0], w[0][1], 0, 0),
            (w[1][0], w[1][1], 0, 0),
            (0, 0, winv[0][0], winv[1][0]),
            (0, 0, winv[0][1], winv[1][1]),
        )
        self._apply_cycle_matrix(m)

    def invert_corner(self, i):
        """Swap A_i <-> B_i with a sign: the tau_i-corner inversion."""
        for row in range(2):
            ai, bi = self.pa[row, i], self.pb[row, i]
            self.pa[row, i] = bi
            self.pb[row, i] = -ai
        m = [[int(r == c) for c in range(4)] for r in range(4)]
        m[i][i] = 0
        m[i][2 + i] = 1
        m[2 + i][2 + i] = 0
        m[2 + i][i] = -1
        self._apply_cycle_matrix(tuple(tuple(r) for r in m))


def _reduce_frame(frame: _Frame, slack: float = REDUCTION_SLACK, max_sweeps: int = _MAX_SWEEPS):
    """Drive tau into |Re| <= 1/2, Im Lagrange-reduced, Im tau1 >= sqrt(3)/2."""
    for _ in range(max_sweeps):
        tau = frame.tau()
        re = [[float(tau[i, j].real) for j in range(2)] for i in range(2)]
        s = [[-round((re[i][j] + re[j][i]) / 2) for j in range(2)] for i in range(2)]
        if any(s[i][j] for i in range(2) for j in range(2)):
            frame.translate(s)
            tau = frame.tau()
        y = _im_matrix(tau)
        v = _lagrange_reduce(y)
        if v != [[1, 0], [0, 1]]:
            det = v[0][0] * v[1][1] - v[0][1] * v[1][0]
            w = ((v[1][1] * det, -v[1][0] * det), (-v[0][1] * det, v[0][0] * det))
            frame.gl_move(w)  # W = V^-T so that tau' = V^T tau V
            tau = frame.tau()
        if abs(tau[0, 0]) < 1 - slack:
            frame.invert_corner(0)
            continue
        re = [[float(tau[i, j].real) for j in range(2)] for i in range(2)]
        if any(abs(re[i][j]) > 0.5 + slack for i in range(2) for j in range(2)):
            continue
        y = _im_matrix(tau)
        if not (
            y[1, 1] >= y[0, 0] - slack
            and y[0, 0] >= 2 * y[0, 1] - slack
            and y[0, 1] >= -slack
            and y[0, 0] >= math.sqrt(3) / 2 - slack
        ):
            continue
        if not _is_sp4(frame.gamma):
            raise ReductionStall("accumulated transform left Sp4(Z)")
        return frame
    raise ReductionStall("Siegel reduction did not converge")


def reduce_siegel(tau, slack: float = REDUCTION_SLACK, max_sweeps: int = _MAX_SWEEPS):
    """Reduce tau toward the Siegel fundamental domain.

    Returns (tau_reduced, transform) where transform is the integer Sp4
    matrix acting on the cycle column (A1, A2, B1, B2) that realizes the
    reduction; callers transport characteristics and Z-lifts with it.
    """
    frame = _Frame(mp.eye(2), mp.matrix(tau))
    frame = _reduce_frame(frame, slack=slack, max_sweeps=max_sweeps)
    return frame.tau(), frame.gamma


def siegel_inequalities_hold(tau, slack: float = REDUCTION_SLACK) -> bool:
    y = _im_matrix(tau)
    re_ok = all(abs(float(tau[i, j].real)) <= 0.5 + slack for i in range(2) for j in range(2))
    return bool(
        re_ok
        and y[1, 1] >= y[0, 0] - slack
        and y[0, 0] >= 2 * y[0, 1] - slack
        and y[0, 1] >= -slack
        and y[0, 0] >= math.sqrt(3) / 2 - slack
    )


# --------------------------------------------------------------------------
# branch tracking and path integrals
# --------------------------------------------------------------------------


class _BranchTracker:
    """Continuous sqrt(f) along a polyline, one unwrapped argument per root.

    Along a straight segment that avoids rho, the continuous change of
    arg(x - rho) equals the principal argument of the ratio (it never reaches
    pi in absolute value), so tracking is exact rather than sampled.
    """

    def __init__(self, roots, z0):
        self.roots = roots
        self.z = mp.mpc(z0)
        self.args = [mp.arg(self.z - r) for r in roots]

    def advance(self, znew):
        znew = mp.mpc(znew)
        for i, r in enumerate(self.roots):
            self.args[i] += mp.arg((znew - r) / (self.z - r))
        self.z = znew

    def _args_at(self, x):
        return [
            self.args[i] + mp.arg((x - r) / (self.z - r))
            for i, r in enumerate(self.roots)
        ]

    def y_at(self, x, exclude: Optional[int] = None):
        """sqrt(prod (x - rho_i)) with the tracked branch; optionally drop one factor."""
        x = mp.mpc(x)
        total_log = mp.mpf(0)
        total_arg = mp.mpf(0)
        for i, (r, ang) in enumerate(zip(self.roots, self._args_at(x))):
            if i == exclude:
                continue
            total_log += mp.log(abs(x - r))
            total_arg += ang
        return mp.e ** (total_log / 2 + 1j * total_arg / 2)


def _dist_point_segment(p, a, b) -> float:
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return float(abs(p - a))
    t = ((p - a) * mp.conj(ab)).real / denom
    t = min(1.0, max(0.0, float(t)))
    return float(abs(p - (a + t * ab)))


def _build_path(z0, z1, obstacles, clearance: float, depth: int = 6):
    """Waypoints from z0 to z1 whose segments keep clearance from obstacles."""
    viol = None
    worst = clearance
    for o in obstacles:
        if abs(o - z0) < 1e-30 or abs(o - z1) < 1e-30:
            continue
        d = _dist_point_segment(o, z0, z1)
        if d < worst:
            worst = d
            viol = o
    if viol is None or depth == 0:
        return [z0, z1]
    ab = z1 - z0
    t = ((viol - z0) * mp.conj(ab)).real / abs(ab) ** 2
    foot = z0 + t * ab
    normal = 1j * ab / abs(ab)
    side = 1 if ((viol - foot) * mp.conj(normal)).real <= 0 else -1
    w = foot + side * normal * (2 * clearance)
    return (
        _build_path(z0, w, obstacles, clearance, depth - 1)[:-1]
        + _build_path(w, z1, obstacles, clearance, depth - 1)
    )


def _quad_vec(f, a, b):
    """mp.quad for a 2-vector integrand, sharing evaluations across components."""
    cache: dict = {}

    def comp(idx):
        def g(t):
            if t not in cache:
                cache[t] = f(t)
            return cache[t][idx]

        return g

    return mp.matrix(
        [mp.quad(comp(0), [a, b], maxdegree=8), mp.quad(comp(1), [a, b], maxdegree=8)]
    )


def _segment_piece(curve, tracker: _BranchTracker, z1):
    """Integral of (dx/y, x dx/y) along [tracker.z, z1]; advances the tracker."""
    z0 = tracker.z
    dz = z1 - z0

    def f(t):
        x = z0 + t * dz
        y = tracker.y_at(x)
        return (dz / y, x * dz / y)

    val = _quad_vec(f, 0, 1)
    tracker.advance(z1)
    return val


def _root_piece(curve, tracker: _BranchTracker, root_idx: int, z1, reverse: bool):
    """Integral from the branch point roots[root_idx] to z1 (or reversed).

    Substituting x = rho + (z1 - rho) w^2 absorbs the endpoint singularity;
    the leftover branch is matched to the tracker at z1, which must be the
    tracker's current position.
    """
    rho = tracker.roots[root_idx]
    assert abs(tracker.z - z1) < 1e-25 * (1 + abs(z1))
    zeta = mp.sqrt(z1 - rho)
    ref = zeta * tracker.y_at(z1, exclude=root_idx)
    full = tracker.y_at(z1)
    sign = full / ref
    sgn = mp.mpf(1) if abs(sign - 1) < abs(sign + 1) else mp.mpf(-1)

    def f(w):
        x = rho + (z1 - rho) * w * w
        g = tracker.y_at(x, exclude=root_idx)
        pref = 2 * zeta / (sgn * g)
        return (pref, pref * x)

    val = _quad_vec(f, 0, 1)
    return -val if reverse else val


def _infinity_piece(curve, tracker: _BranchTracker, z_far):
    """Integral of the basis from infinity down the ray to z_far.

    x(v) = z_far / v^2 keeps the path on the outward ray, where the integrand
    is analytic through v = 0 after the substitution.
    """
    assert abs(tracker.z - z_far) < 1e-25 * (1 + abs(z_far))

    def f(v):
        if v == 0:
            v = mp.mpf(2) ** (-mp.mp.prec)
        x = z_far / (v * v)
        y = tracker.y_at(x)
        dx = -2 * z_far / (v * v * v)
        return (dx / y, x * dx / y)

    return _quad_vec(f, 0, 1)


def _integral_root_to_root(curve, roots, ia: int, ib: int, prec_bits: int):
    """(dx/y, x dx/y) integrated from root ia to root ib.

    Fast path: Gauss-Chebyshev on the straight segment when it is clear of
    the other roots (the 1/sqrt(1-u^2) endpoint weight is exact there).
    Otherwise a detour polyline with square-root substitutions at both ends.
    """
    a, b = roots[ia], roots[ib]
    others = [r for k, r in enumerate(roots) if k not in (ia, ib)]
    seg_len = abs(b - a)
    clearance = min(_dist_point_segment(r, a, b) for r in others)
    if clearance > 0.1 * seg_len:
        return _edge_chebyshev(curve, roots, ia, ib, prec_bits)
    # detour: a -> w1 -> ... -> b with endpoint substitutions
    scale = max(abs(r) for r in roots) + 1
    clear = max(min(abs(r1 - r2) for i, r1 in enumerate(roots)
                    for r2 in roots[i + 1:]) / 8, 1e-6 * scale)
    pts = _build_path(a, b, others, float(clear))
    if len(pts) < 3:
        mid = (a + b) / 2 + 1j * (b - a) / 2
        pts = [a, mid, b]
    tracker = _BranchTracker(roots, pts[1])
    total = _root_piece(curve, tracker, ia, pts[1], reverse=False)
    for z in pts[2:-1]:
        total = total + _segment_piece(curve, tracker, z)
    total = total + _root_piece(curve, tracker, ib, tracker.z, reverse=True)
    return total


def _edge_chebyshev(curve, roots, ia: int, ib: int, prec_bits: int):
    a, b = roots[ia], roots[ib]
    others = [r for k, r in enumerate(roots) if k not in (ia, ib)]
    m = (a + b) / 2
    h = (b - a) / 2
    ref_args = [mp.arg(m - r) for r in others]

    def sqrt_g(x):
        tl = mp.mpf(0)
        ta = mp.mpf(0)
        for r, ang in zip(others, ref_args):
            tl += mp.log(abs(x - r))
            ta += ang + mp.arg((x - r) / (m - r))
        return mp.e ** (tl / 2 + 1j * ta / 2)

    tol = mp.mpf(2) ** (-(prec_bits - 8))
    prev = None
    n = 24
    while n <= 6144:
        s0 = mp.mpc(0)
        s1 = mp.mpc(0)
        for k in range(1, n + 1):
            u = mp.cos((2 * k - 1) * mp.pi / (2 * n))
            x = m + h * u
            w = 1 / sqrt_g(x)
            s0 += w
            s1 += x * w
        cur = mp.matrix([s0 * mp.pi / (n * 1j), s1 * mp.pi / (n * 1j)])
        if prev is not None:
            scale = 1 + max(abs(cur[0]), abs(cur[1]))
            if max(abs(cur[0] - prev[0]), abs(cur[1] - prev[1])) < tol * scale:
                return cur
        prev = cur
        n *= 2
    raise NonConvergence(f"edge quadrature stalled for edge ({ia},{ib})")


# --------------------------------------------------------------------------
# period matrices and Riemann data
# --------------------------------------------------------------------------


def _symplectic_basis(e):
    """S in GL4(Z), columns (A1, A2, B1, B2), with S^T E S = J."""
    basis = [tuple(int(i == j) for j in range(4)) for i in range(4)]

    def pair(u, w):
        return sum(u[i] * e[i][j] * w[j] for i in range(4) for j in range(4))

    pairs = []
    for _ in range(2):
        found = None
        for i in range(len(basis)):
            for j in range(len(basis)):
                if i != j and abs(pair(basis[i], basis[j])) == 1:
                    found = (i, j)
                    break
            if found:
                break
        if not found:
            raise ValueError("no unimodular pivot; form not unimodular?")
        i, j = found
        u, w = basis[i], basis[j]
        if pair(u, w) == -1:
            w = tuple(-c for c in w)
        rest = [v for k, v in enumerate(basis) if k not in (i, j)]
        newrest = []
        for v in rest:
            c1, c2 = pair(v, w), pair(v, u)
            newrest.append(tuple(v[t] - c1 * u[t] + c2 * w[t] for t in range(4)))
        pairs.append((u, w))
        basis = newrest
    cols = [pairs[0][0], pairs[1][0], pairs[0][1], pairs[1][1]]
    s = tuple(tuple(cols[c][r] for c in range(4)) for r in range(4))
    check = _mat_mul_int(_mat_mul_int(tuple(zip(*s)), e), s)
    if check != _J4:
        raise ValueError("symplectic reduction failed")
    return s


def _chain_orderings(roots):
    by_re = sorted(range(5), key=lambda i: (roots[i].real, roots[i].imag))
    by_im = sorted(range(5), key=lambda i: (roots[i].imag, roots[i].real))
    by_angle = sorted(range(5), key=lambda i: (mp.arg(roots[i]), abs(roots[i])))
    greedy = [by_re[0]]
    left = set(range(5)) - {by_re[0]}
    while left:
        nxt = min(left, key=lambda i: abs(roots[i] - roots[greedy[-1]]))
        greedy.append(nxt)
        left.remove(nxt)
    seen = []
    for order in (by_re, by_angle, greedy, by_im):
        t = tuple(order)
        if t not in seen:
            seen.append(t)
    return seen


@dataclass
class RiemannData:
    """Reduced period data for one curve, plus the characteristic table."""

    curve: QuinticCurve
    roots: tuple
    tau: mp.matrix
    big_period: mp.matrix  # Omega_A of the reduced frame
    small_period: mp.matrix  # Omega_B of the reduced frame
    precision_bits: int
    transform: tuple  # Sp4(Z) word accumulated by the reduction
    char_table: dict = field(default_factory=dict)
    chi_infinity: ThetaCharacteristic = CHI_INFINITY
    aj_basepoint: CurvePoint = field(default_factory=CurvePoint.infinity)
    _aj_cache: dict = field(default_factory=dict)

    def imtau(self):
        return _im_matrix(self.tau)

    def _aj_raw(self, x_target, branch_idx: Optional[int]):
        """Path integral of the basis from infinity to the target fiber."""
        with mp.workprec(self.precision_bits + 32):
            roots = self.roots
            scale = max(abs(r) for r in roots) + 1
            r_far = 4 * scale
            xt = roots[branch_idx] if branch_idx is not None else mp.mpc(x_target)
            if abs(xt) > 1e-12 * scale:
                direction = xt / abs(xt)
            else:
                direction = max(
                    (mp.e ** (1j * (mp.pi * k / 8 + mp.mpf("0.37"))) for k in range(16)),
                    key=lambda d: min(abs(mp.arg(r / d)) for r in roots if abs(r) > 0),
                )
            z_far = direction * max(r_far, 2 * abs(xt))
            clear = max(
                min(abs(r1 - r2) for i, r1 in enumerate(roots) for r2 in roots[i + 1:]) / 8,
                1e-6 * scale,
            )
            obstacles = list(roots)
            pts = _build_path(z_far, xt, obstacles, float(clear))
            tracker = _BranchTracker(roots, z_far)
            total = _infinity_piece(self.curve, tracker, z_far)
            if branch_idx is None:
                for z in pts[1:]:
                    total = total + _segment_piece(self.curve, tracker, z)
            else:
                for z in pts[1:-1]:
                    total = total + _segment_piece(self.curve, tracker, z)
                total = total + _root_piece(
                    self.curve, tracker, branch_idx, tracker.z, reverse=True
                )
            return total

    def abel_jacobi_root(self, idx: int):
        """Normalized Abel-Jacobi image of the Weierstrass point (rho_idx, 0)."""
        key = ("root", idx)
        if key not in self._aj_cache:
            with mp.workprec(self.precision_bits + 32):
                raw = self._aj_raw(None, idx)
                self._aj_cache[key] = mp.lu_solve(self.big_period, raw)
        return self._aj_cache[key]

    def abel_jacobi(self, point: CurvePoint):
        """Normalized Abel-Jacobi image of a curve point (defined up to sign)."""
        if point.is_infinity:
            return mp.matrix([0, 0])
        key = ("pt", point.s, point.e)
        if key not in self._aj_cache:
            with mp.workprec(self.precision_bits + 32):
                x = mp.mpf(point.s) / mp.mpf(point.e) ** 2
                branch = None
                for i, r in enumerate(self.roots):
                    if abs(x - r) < 1e-20 * (1 + abs(r)):
                        branch = i
                        break
                raw = self._aj_raw(x, branch)
                self._aj_cache[key] = mp.lu_solve(self.big_period, raw)
        return self._aj_cache[key]

    def split_lattice_coords(self, z):
        """Real (a, b) with z = a + tau b; columns of the lattice basis."""
        with mp.workprec(self.precision_bits + 32):
            y = self.imtau()
            b = mp.lu_solve(y, mp.matrix([mp.mpc(z[0]).imag, mp.mpc(z[1]).imag]))
            a = mp.matrix(
                [
                    mp.mpc(z[0]).real - self.tau[0, 0].real * b[0] - self.tau[0, 1].real * b[1],
                    mp.mpc(z[1]).real - self.tau[1, 0].real * b[0] - self.tau[1, 1].real * b[1],
                ]
            )
            return a, b

    def z_lift(self, z):
        """Representative of z in the fundamental domain [-1/2,1/2]^2 + tau[...]."""
        a, b = self.split_lattice_coords(z)
        a0 = mp.matrix([a[0] - mp.nint(a[0]), a[1] - mp.nint(a[1])])
        b0 = mp.matrix([b[0] - mp.nint(b[0]), b[1] - mp.nint(b[1])])
        zred = mp.matrix(
            [
                a0[0] + self.tau[0, 0] * b0[0] + self.tau[0, 1] * b0[1],
                a0[1] + self.tau[1, 0] * b0[0] + self.tau[1, 1] * b0[1],
            ]
        )
        return zred, a0, b0

    def to_json_dict(self) -> dict:
        return {
            "curve": self.curve.to_json_dict(),
            "tau": [[mp.nstr(self.tau[i, j], 30) for j in range(2)] for i in range(2)],
            "char_table": {
                str(i): [c.a1, c.a2, c.b1, c.b2] for i, c in self.char_table.items()
            },
            "precision_bits": self.precision_bits,
        }


def _candidate_frames(omega_full):
    """Symplectic frames from the eight tridiagonal intersection candidates."""
    for signs in itertools.product((1, -1), repeat=3):
        e = [[0] * 4 for _ in range(4)]
        for i, s in enumerate(signs):
            e[i][i + 1] = s
            e[i + 1][i] = -s
        try:
            s_mat = _symplectic_basis(tuple(tuple(r) for r in e))
        except ValueError:
            continue
        cols = []
        for j in range(4):
            col = [mp.mpc(0), mp.mpc(0)]
            for k in range(4):
                if s_mat[k][j]:
                    col[0] += s_mat[k][j] * omega_full[0, k]
                    col[1] += s_mat[k][j] * omega_full[1, k]
            cols.append(col)
        pa = mp.matrix([[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])
        pb = mp.matrix([[cols[2][0], cols[3][0]], [cols[2][1], cols[3][1]]])
        yield pa, pb


def _tau_ok(tau, prec_bits) -> bool:
    sym = abs(tau[0, 1] - tau[1, 0])
    scale = 1 + max(abs(tau[i, j]) for i in range(2) for j in range(2))
    if sym > mp.mpf(2) ** (-(prec_bits // 2)) * scale:
        return False
    y = _im_matrix(tau)
    return y[0, 0] > 0 and (y[0, 0] * y[1, 1] - y[0, 1] ** 2) > 0


def compute_periods(curve: QuinticCurve, precision_bits: int) -> RiemannData:
    """Full analytic bundle for one curve (cached per curve and precision).

    Raises PathDegeneracy when branch points collide at working precision,
    NonConvergence when quadrature or the candidate filter fails.
    """
    cache_key = ("rdata", precision_bits)
    cached = curve._analytic_cache.get(cache_key)
    if cached is not None:
        return cached

    for attempt_bits in (precision_bits, 2 * precision_bits):
        try:
            rdata = _compute_periods_once(curve, attempt_bits)
            break
        except AmbiguousMatch:
            if attempt_bits != precision_bits:
                raise
    curve._analytic_cache[cache_key] = rdata
    return rdata


def _compute_periods_once(curve: QuinticCurve, precision_bits: int) -> RiemannData:
    work = precision_bits + 48
    roots = complex_roots(curve, work)
    scale = max(abs(r) for r in roots) + 1
    min_gap = min(abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:])
    if min_gap < mp.mpf(2) ** (-(precision_bits // 2)) * scale:
        raise PathDegeneracy("branch points closer than integration tolerance")

    last_exc: Exception | None = None
    with mp.workprec(work):
        for order in _chain_orderings(roots):
            chain = [roots[i] for i in order]
            try:
                loops = []
                for i in range(4):
                    v = _integral_root_to_root(
                        curve, chain, i, i + 1, precision_bits
                    )
                    loops.append((2 * v[0], 2 * v[1]))
            except (NonConvergence, PathDegeneracy) as exc:
                last_exc = exc
                continue
            omega_full = mp.matrix(
                [[loops[j][0] for j in range(4)], [loops[j][1] for j in range(4)]]
            )
            for pa, pb in _candidate_frames(omega_full):
                try:
                    tau = pa**-1 * pb
                except ZeroDivisionError:
                    continue
                if not _tau_ok(tau, precision_bits):
                    continue
                try:
                    frame = _reduce_frame(_Frame(pa, pb))
                except ReductionStall as exc:
                    last_exc = exc
                    continue
                tau_red = frame.tau()
                if not siegel_inequalities_hold(tau_red):
                    last_exc = ReductionStall("inequalities unmet after sweeps")
                    continue
                rdata = RiemannData(
                    curve=curve,
                    roots=tuple(chain),
                    tau=tau_red,
                    big_period=frame.pa,
                    small_period=frame.pb,
                    precision_bits=precision_bits,
                    transform=frame.gamma,
                )
                assign_characteristics(rdata, curve)
                return rdata
    raise NonConvergence(
        f"no chain ordering produced a valid period frame for {curve.coeffs()}"
    ) from last_exc


# --------------------------------------------------------------------------
# characteristics, c_rho, local height, Igusa
# --------------------------------------------------------------------------


def _detect_theta_divisor_char(rdata: RiemannData) -> ThetaCharacteristic:
    """The odd characteristic whose theta divisor is the Abel-Jacobi image.

    In the branch-ordering-adapted classical frame this is ((1/2,1/2),
    (0,1/2)), but Siegel reduction relabels characteristics, so it is pinned
    numerically instead: the AJ image of a generic curve point lies on the
    theta divisor and on no other translate, hence exactly one odd theta
    vanishes there.
    """
    scale = max(abs(r) for r in rdata.roots) + 1
    for pick in (mp.mpc("0.311", "0.173"), mp.mpc("-0.437", "0.291"), mp.mpc("0.129", "-0.533")):
        x0 = pick * scale
        if min(abs(x0 - r) for r in rdata.roots) < 0.03 * scale:
            continue
        raw = rdata._aj_raw(x0, None)
        z = mp.lu_solve(rdata.big_period, raw)
        zred, _, _ = rdata.z_lift(z)
        vals = sorted(
            (abs(theta(chi, zred, rdata.tau)), chi) for chi in ODD_CHARACTERISTICS
        )
        if vals[0][0] < CHAR_MATCH_TOL * (1 + vals[1][0]) and vals[1][0] > 1e3 * vals[0][0]:
            return vals[0][1]
    raise AmbiguousMatch("could not isolate the theta-divisor characteristic")


def assign_characteristics(rdata: RiemannData, curve: QuinticCurve) -> dict:
    """Match AJ images of the Weierstrass points to odd characteristics.

    P_rho lifts to chi~_inf + chi~_rho where chi_inf is the theta-divisor
    characteristic of the frame, so expressing the image as A + tau B with
    half-integer A, B and subtracting chi_inf reads off chi_rho.  The six
    odd characteristics must be hit bijectively by {infinity} u {roots}.
    """
    chi_inf = _detect_theta_divisor_char(rdata)
    table = {}
    theta_scale = 1 + abs(theta(ThetaCharacteristic(0, 0, 0, 0), mp.matrix([0, 0]), rdata.tau))
    for idx in range(5):
        z = rdata.abel_jacobi_root(idx)
        a, b = rdata.split_lattice_coords(z)
        resid = max(abs(2 * v - mp.nint(2 * v)) for v in (a[0], a[1], b[0], b[1]))
        if resid > CHAR_MATCH_TOL:
            raise AmbiguousMatch(
                f"AJ image of root {idx} off the half-period grid by {float(resid):.3g}"
            )
        eta = ThetaCharacteristic(
            int(mp.nint(2 * b[0])) % 2,  # tau-coefficients give the a-part
            int(mp.nint(2 * b[1])) % 2,
            int(mp.nint(2 * a[0])) % 2,
            int(mp.nint(2 * a[1])) % 2,
        )
        chi = eta + chi_inf  # subtraction and addition agree mod 1
        if chi.is_even:
            raise AmbiguousMatch(f"root {idx} matched an even characteristic")
        if abs(theta(chi, z, rdata.tau)) > CHAR_MATCH_TOL * theta_scale:
            raise AmbiguousMatch(f"theta_chi does not vanish at the lift of root {idx}")
        table[idx] = chi
    chars = set(table.values())
    if len(chars) != 5 or chi_inf in chars:
        raise AmbiguousMatch("root characteristics not bijective onto odds - {chi_inf}")
    rdata.chi_infinity = chi_inf
    rdata.char_table = table
    return table


def c_rho(
    rdata: RiemannData,
    curve: QuinticCurve,
    rho_idx: int,
    alpha_idx: int,
) -> mp.mpf:
    """Additive constant of the local-height formula for ell_{rho}.

    c_rho = 2 log|theta_{chi_rho + chi_inf + chi_alpha}(0)|
            + log(|f'(alpha)|^(1/2) / |alpha - rho|); Thomae's formula makes
    the value independent of the auxiliary root alpha.
    """
    if rho_idx == alpha_idx:
        raise ValueError("auxiliary root must differ from rho")
    chi = rdata.char_table[rho_idx] + rdata.chi_infinity + rdata.char_table[alpha_idx]
    if not chi.is_even:
        raise EvenThetaVanishes("three distinct odd characteristics must sum to even")
    with mp.workprec(rdata.precision_bits + 32):
        t0 = theta(chi, mp.matrix([0, 0]), rdata.tau)
        if abs(t0) < mp.mpf(2) ** (-(rdata.precision_bits // 2)):
            raise EvenThetaVanishes("even theta constant underflowed")
        alpha = rdata.roots[alpha_idx]
        rho = rdata.roots[rho_idx]
        return (
            2 * mp.log(abs(t0))
            + mp.log(mp.sqrt(abs(curve.fprime_at(alpha))) / abs(alpha - rho))
        )


def lambda_inf_theta(
    rdata: RiemannData,
    curve: QuinticCurve,
    Ktilde: Sequence,
    Z_lift,
    rho_idx: Optional[int] = None,
    alpha_idx: Optional[int] = None,
) -> mp.mpf:
    """Archimedean local canonical height of the lift Ktilde via theta.

    Evaluates -log|Xi_{chi_rho}(Z)^2| + log|ell_rho(Ktilde)| + c_rho.  The
    result does not depend on the admissible rho (tested); rho defaults to
    the root maximizing |ell_rho(Ktilde)| to stay off the divisor.
    """
    from .kummer import ell_form

    with mp.workprec(rdata.precision_bits + 32):
        kvals = [mp.mpc(v) for v in Ktilde]
        scale = max(abs(v) for v in kvals) * (1 + max(abs(r) for r in rdata.roots)) ** 2
        if rho_idx is None:
            rho_idx = max(
                range(5), key=lambda i: abs(ell_form(rdata.roots[i], kvals))
            )
        lval = ell_form(rdata.roots[rho_idx], kvals)
        if abs(lval) < 1e-12 * scale:
            raise OnDivisor(f"ell_rho vanishes at Ktilde for root {rho_idx}")
        if alpha_idx is None:
            alpha_idx = next(i for i in range(5) if i != rho_idx)
        zred, _, _ = rdata.z_lift(Z_lift)
        v = xi(rdata.char_table[rho_idx], zred, rdata.tau)
        if v == 0:
            raise OnDivisor("Xi underflowed at the lift; point on the divisor")
        return (
            -mp.log(v**2)
            + mp.log(abs(lval))
            + c_rho(rdata, curve, rho_idx, alpha_idx)
        )


def igusa_i3(
    curve: QuinticCurve,
    via: str,
    rdata: Optional[RiemannData] = None,
    precision_bits: int = 192,
):
    """Reduced Igusa invariant I4^5 / Delta^2, from roots or theta constants.

    via="roots" evaluates the binary-sextic Igusa-Clebsch I4 of the model
    with a branch point at infinity, i.e. the ten-partition sum
    sum [(r_i-r_j)(r_j-r_k)(r_k-r_i)]^2 (r_l-r_m)^2 over the five finite
    roots.  via="thetas" evaluates (sum_even theta^8)^5 / (prod_even
    theta^2)^2.  The two normalizations differ by one absolute constant,
    which the calibration records; only constancy across curves is asserted.
    """
    if via == "roots":
        roots = complex_roots(curve, precision_bits)
        with mp.workprec(precision_bits + 32):
            i4 = mp.mpc(0)
            for trip in itertools.combinations(range(5), 3):
                i, j, k = trip
                l, m = [t for t in range(5) if t not in trip]
                cyc = (
                    (roots[i] - roots[j])
                    * (roots[j] - roots[k])
                    * (roots[k] - roots[i])
                )
                i4 += cyc * cyc * (roots[l] - roots[m]) ** 2
            return i4**5 / mp.mpf(curve.delta_f) ** 2
    if via == "thetas":
        if rdata is None:
            raise ValueError("via='thetas' needs Riemann data")
        with mp.workprec(rdata.precision_bits + 32):
            zero = mp.matrix([0, 0])
            consts = [theta(c, zero, rdata.tau) for c in EVEN_CHARACTERISTICS]
            s8 = mp.fsum([t**8 for t in consts])
            p2 = mp.mpc(1)
            for t in consts:
                p2 *= t * t
            return s8**5 / p2**2
    raise ValueError("via must be 'roots' or 'thetas'")
