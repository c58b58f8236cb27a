"""Exception types shared across the package.

The two error families matter for the command line front end: validation
errors map to exit code 2, numerical failures to exit code 3.
"""


class PlateLabError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PlateLabError):
    """Invalid input: bad geometry, bad configuration or a broken file."""


class DegenerateInput(ValidationError):
    """Point set has no two-dimensional convex hull."""


class OutsideAmbientBall(ValidationError):
    """A polygon does not fit inside the ambient ball B_R(0)."""


class PreconditionViolated(ValidationError):
    """An operation was called outside its documented preconditions."""


class EmptyGrid(ValidationError):
    """No grid node falls strictly inside the domain."""


class NumericalError(PlateLabError):
    """A numerical procedure failed in a detectable way."""


class IndefiniteSystem(NumericalError):
    """The operator A + gamma*B is not positive definite.

    Signals that the tension sits at or below the admissibility boundary
    -mu_1 of the discrete operator pair.
    """


class NoConvergence(NumericalError):
    """An iteration hit its cap before reaching the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ZeroDenominator(NumericalError):
    """Rayleigh quotient requested for a field with vanishing B-norm."""


class ThresholdNotFound(NumericalError):
    """No sampled tension achieved positivity."""


class ProposalInfeasible(PlateLabError):
    """A shape proposal could not be projected into the admissible class."""
