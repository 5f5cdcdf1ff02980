"""Exception hierarchy shared across the toolkit.

The CLI maps these onto stable exit codes: ValidationError -> 1,
NumericalError -> 2.
"""


class ArtAuthError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ArtAuthError):
    """Bad input: unreadable files, malformed data, violated preconditions."""


class NumericalError(ArtAuthError):
    """Numerical failure, e.g. the QP solver did not converge."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
