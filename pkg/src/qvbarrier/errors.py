"""Exception types shared across the library."""


class QvBarrierError(Exception):
    """Base class for all library errors."""

    code = "error"


class DegenerateDiscriminant(QvBarrierError):
    """The frequency pair sits on the zero set of the root discriminant."""

    code = "degenerate_discriminant"


class BranchPoint(QvBarrierError):
    """QV-frequency coincides with the rebate-root branch point s = -i/8."""

    code = "branch_point"


class KernelPole(QvBarrierError):
    """Smoothed-Heaviside kernel evaluated at (or too near) a csch pole."""

    code = "kernel_pole"


class ContourViolation(QvBarrierError):
    """Contour height violates the admissible strip for a pricing formula."""

    code = "contour_violation"


class QuadratureFailure(QvBarrierError):
    """A quadrature did not reach the requested tolerance."""

    code = "quadrature_failure"


class NonfiniteTerm(QvBarrierError):
    """A payoff series term evaluated to a non-finite value."""

    code = "nonfinite_term"


class InvalidGrid(QvBarrierError):
    """Strike grid is unsorted, non-positive, or otherwise unusable."""

    code = "invalid_grid"


class ConfigError(QvBarrierError):
    """Run configuration failed validation."""

    code = "config_error"
