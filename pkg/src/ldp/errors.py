"""Exception types shared across the toolkit."""


class LdpError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(LdpError):
    """Bad inputs: malformed kernel specs, inconsistent grids, out-of-range
    parameters.  These are caught before any numerics run."""


class DomainViolation(LdpError):
    """An evaluation point lies outside the finiteness domain of H (or a
    solver would be forced to sample H outside it)."""


class NonConvergence(LdpError):
    """An iterative routine (quadrature refinement, Newton solve, bisection)
    exhausted its budget without meeting its tolerance."""


class CFLViolation(LdpError):
    """A user-supplied time step violates the stability restriction of an
    explicit scheme."""


class TruncationTooSmall(ValidationError):
    """The whole-line surrogate domain does not cover the kernel reach
    beyond the ball of interest."""


class UnsupportedKernel(LdpError):
    """The requested operation is not defined for this kernel class
    (e.g. K-transform machinery on critical or asymmetric kernels)."""


class BelowRange(ValidationError):
    """Argument below the admissible range of an inverse transform."""


class MajorizationUnavailable(LdpError):
    """No shipped symmetric kernel family majorizes the given asymmetric
    kernel, so no predicted exponent can be offered."""


class InsufficientData(ValidationError):
    """Not enough usable records for a regression."""


class Saturated(LdpError):
    """All measured differences sit at the floating-point floor; no rate can
    be extracted."""
