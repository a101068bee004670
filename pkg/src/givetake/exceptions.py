"""Exception hierarchy shared across the package."""


class GiveTakeError(Exception):
    """Base class for all package errors."""


class DomainError(GiveTakeError, ValueError):
    """An argument lies outside the domain of the operation."""


class ErgodicityError(GiveTakeError):
    """The direction function fails the non-absorption condition at the endpoints."""


class NumericalError(GiveTakeError, ArithmeticError):
    """A numerical procedure failed (underflow, non-convergence, negativity)."""


class UnsupportedError(GiveTakeError, NotImplementedError):
    """The requested combination of laws or variants is not supported."""


class VerificationError(GiveTakeError):
    """A verification check did not meet its threshold."""
