"""Exception hierarchy shared by all certbound modules."""


class CertboundError(Exception):
    """Base class for all errors raised by this package."""


class TiltOverflow(CertboundError):
    """Exponential tilt left the finite domain of the weight function."""


class DegenerateVariance(CertboundError):
    """Tilted variance collapsed below the numerical floor."""


class OutOfHull(CertboundError):
    """Evaluation point lies outside the open convex hull of the sum support."""


class NoConvergence(CertboundError):
    """Root finder exhausted its iteration budget."""


class TooLarge(CertboundError):
    """Exact convolution would exceed the support-size budget."""


class BadParams(CertboundError):
    """Parameters outside the documented domain of an operation."""


class QuadratureFailure(CertboundError):
    """Numerical integration produced a non-finite or invalid result."""


class QuadratureBudget(CertboundError):
    """Requested node count below the supported minimum."""


class BadChannel(CertboundError):
    """Channel parameters outside their admissible range."""


class NoBracket(CertboundError):
    """Optimization objective was not unimodal over the search bracket."""


class ConfigError(CertboundError):
    """Run configuration failed validation."""
