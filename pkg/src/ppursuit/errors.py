"""Exception types shared across the package."""


class PursuitBaseError(Exception):
    """Root of all package errors."""


class DegenerateInputError(PursuitBaseError, ValueError):
    """Input is well-formed but numerically degenerate (too few rows, zero variance, ...)."""


class ContractError(PursuitBaseError, ValueError):
    """A documented precondition does not hold."""


class DimensionError(PursuitBaseError, ValueError):
    """Shapes disagree, or a size guard was exceeded."""


class ParseError(PursuitBaseError, ValueError):
    """A file could not be parsed; the message carries row/column coordinates."""


class EmptyResultError(PursuitBaseError, ValueError):
    """A filter removed everything."""


class PursuitError(PursuitBaseError, RuntimeError):
    """Every optimizer restart failed."""
