"""Exception hierarchy shared by all modules."""


class TphcovError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(TphcovError, ValueError):
    """Illegal space, smoothness or configuration parameters."""


class DomainError(TphcovError, ValueError):
    """An argument lies outside the domain of a function (e.g. t outside [-1, 1])."""


class SpectralIndexError(TphcovError, IndexError):
    """A degree that is not in the eigenvalue index set or the table range."""


class NotRKHSError(ParameterError):
    """Sobolev order too small for the space to be a reproducing kernel Hilbert space."""


class SmoothnessError(ParameterError):
    """Smoothness order outside the range where a diagnostic is defined."""


class DesignError(TphcovError, ValueError):
    """A dataset that cannot produce a pairwise design."""


class SpaceMismatchError(TphcovError, TypeError):
    """Objects from different spaces were combined."""


class UnsupportedSpaceError(TphcovError, NotImplementedError):
    """Operation not available on this space family (Cayley plane point operations)."""


class NumericalError(TphcovError, ArithmeticError):
    """A factorization failed or a result is numerically unusable."""


class ResourceError(TphcovError, RuntimeError):
    """A configured size cap would be exceeded."""


class ModelError(TphcovError, ValueError):
    """A covariance model is invalid (e.g. not positive semidefinite)."""
