"""Exception types shared across the package."""


class KPlaneError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KPlaneError, ValueError):
    """A parameter lies outside the range an operation accepts."""


class UnsupportedGeometryError(KPlaneError, ValueError):
    """The requested (n, k) pair or scheme is not supported."""


class ShapeError(KPlaneError, ValueError):
    """Two fields do not share a discretization."""


class SamplingError(KPlaneError, ValueError):
    """A sampled expression produced a non-finite value."""


class GateError(KPlaneError, ValueError):
    """An operation requiring the integer exponent case was called outside it."""


class SplitError(KPlaneError, ValueError):
    """No admissible bounded/small decomposition exists on the grid."""


class DivergenceError(KPlaneError, RuntimeError):
    """An iteration collapsed to zero or otherwise left its admissible set."""


class DiagnosticError(KPlaneError, RuntimeError):
    """A spectral diagnostic had no usable data (e.g. no frequency above floor)."""


class RatioError(KPlaneError, RuntimeError):
    """A ratio diagnostic had a degenerate denominator."""


class UsageError(KPlaneError, ValueError):
    """Bad command line or configuration input."""
