"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: invariant violations map to exit code 2,
precision exhaustion to exit code 3.
"""


class G2Error(Exception):
    """Base class for all package errors."""


class NonConvergence(G2Error):
    """A numerical routine failed at the requested precision; retry higher."""


class PrecisionExhausted(G2Error):
    """Integer or p-adic working precision exceeded the configured budget."""


class InvariantViolation(G2Error):
    """A checked mathematical invariant failed (CLI exit code 2)."""


class DegenerateImage(G2Error):
    """All four duplication forms vanished; input was not on the surface."""


class EqualX(G2Error):
    """Sum/difference coordinates need x(P) != x(Q)."""


class InfinityOperand(G2Error):
    """Operation is not defined for the point at infinity."""


class InfinityPoint(InfinityOperand):
    """Naive height of the infinity point is handled at call sites."""


class TorsionOperand(G2Error):
    """Canonical height indistinguishable from zero; cos(theta) undefined."""


class PathDegeneracy(G2Error):
    """Two branch points closer than the integration tolerance."""


class ReductionStall(G2Error):
    """Siegel reduction did not reach the target inequalities."""


class AmbiguousMatch(G2Error):
    """An Abel-Jacobi image did not land near a unique half-period."""


class EvenThetaVanishes(G2Error):
    """An even theta constant underflowed (should not happen)."""


class OnDivisor(G2Error):
    """The linear form vanished at the point; retry with another root."""


class MissingAnalytic(G2Error):
    """Cell assignment was requested without Riemann data."""


class DegenerateGram(G2Error):
    """A Gram matrix diagonal entry is (numerically) zero."""


class DomainError(G2Error, ValueError):
    """Argument outside the mathematical domain of the operation."""


class EmptyInterval(G2Error):
    """The optimization interval prescribed for this genus is empty."""
