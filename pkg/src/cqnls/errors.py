"""Exception vocabulary shared across the package.

The CLI maps these onto exit codes: argument/domain problems exit 2,
numerical failures exit 3, I/O problems exit 4.
"""


class CQNLSError(Exception):
    """Base class for all package errors."""


class InvalidArgument(CQNLSError):
    """Bad argument value or mismatched grids."""


class InvalidField(CQNLSError):
    """Field samples contain NaN or infinities."""


class OutOfRange(CQNLSError):
    """A parameter lies outside its admissible interval."""


class NoConvergence(CQNLSError):
    """An iterative solve failed to converge."""


class SpectralFailure(CQNLSError):
    """No negative direction found where the eigenvalue reduction needs one."""


class SingularShift(CQNLSError):
    """Resolvent requested at (or too near) a spectral point."""


class IllConditioned(CQNLSError):
    """Linear algebra too ill-conditioned to trust."""


class InsufficientData(CQNLSError):
    """Not enough rows/samples for the requested reduction."""


class NoDecomposition(CQNLSError):
    """State too far from the soliton orbit to decompose."""


class PreconditionViolated(CQNLSError):
    """A documented precondition does not hold for the given input."""
