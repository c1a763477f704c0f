"""Exception hierarchy.

Every error raised by the library derives from :class:`OpenTriError` so that
callers (the CLI in particular) can separate numerical failures from bugs.
"""


class OpenTriError(Exception):
    """Base class for library errors."""


class DomainError(OpenTriError, ValueError):
    """A height or parameter lies outside the domain of a warping function."""


class WarpingError(OpenTriError, ValueError):
    """A warping profile violates m > 0, m(0) = 1 or m'(0) = 0."""


class TruncationError(OpenTriError):
    """A geodesic left the numerical domain ``x <= domain_max``."""


class IntegrationError(OpenTriError):
    """The ODE integrator failed (step-size underflow, blow-up)."""


class BranchError(OpenTriError, ValueError):
    """A quadrature interval contains a turning point (m <= nu inside)."""


class QuadratureError(OpenTriError):
    """An integral could not be evaluated to the requested accuracy."""


class ConnectivityError(OpenTriError):
    """No shooting bracket connects the two points."""


class NonexistenceError(OpenTriError):
    """The requested comparison triangle is not realisable in the model."""


class OrderingError(OpenTriError, ValueError):
    """A curvature lower bound K >= G is violated."""


class ConvexityViolation(OpenTriError):
    """Curve shortening left the glued domain, or a hinge exceeds pi."""


class IterationError(OpenTriError):
    """An iterative procedure did not converge within its sweep budget."""


class ConfigError(OpenTriError, ValueError):
    """Invalid experiment configuration."""
