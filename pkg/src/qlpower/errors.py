"""Exception hierarchy shared across the package.

Everything derives from ``QLPowerError`` so callers (CLI, API) can map any
domain failure to a single exit code / HTTP status.
"""


class QLPowerError(Exception):
    """Base class for all domain errors raised by this package."""


class DomainError(QLPowerError, ValueError):
    """An argument is outside its mathematical domain (prob not in (0,1), ...)."""


class DimensionError(QLPowerError, ValueError):
    """Vector/matrix shapes do not line up."""


class InadmissibleMeanError(QLPowerError):
    """A linear predictor maps to a mean outside the variance function's range."""


class InvalidDispersionError(QLPowerError):
    """Dispersion incompatible with the requested variance law (e.g. sigma2*mu <= 1)."""


class SingularDesignError(QLPowerError):
    """Design matrix is rank deficient."""


class SingularMomentError(QLPowerError):
    """A weighted moment matrix required to be invertible is singular."""


class SingularBlockError(QLPowerError):
    """Leading block of an information matrix is not invertible."""


class NonConvergenceError(QLPowerError):
    """An iterative search exhausted its iteration budget."""


class TooSmallEffectError(QLPowerError):
    """Effect size implies a sample size beyond the supported cap."""


class EmptyGridError(QLPowerError, ValueError):
    """A sweep grid was empty."""
