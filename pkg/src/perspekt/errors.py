"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes, so keep the classes coarse.
"""


class PerspektError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(PerspektError, ValueError):
    """Input outside the domain of an operation (pole, rational input, ...)."""


class PreconditionError(PerspektError, ValueError):
    """A numeric precondition (step size, tolerance, ...) was violated."""


class ResourceError(PerspektError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UnsupportedError(PerspektError):
    """The request is well formed but outside what the toolkit decides."""
