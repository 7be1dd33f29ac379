"""Exception types shared by the escapekit packages"""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class NumericFailure(RuntimeError):
    """A numeric routine did not reach its tolerance or produced a non-finite value."""
