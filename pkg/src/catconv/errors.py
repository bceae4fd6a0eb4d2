"""Exception types shared across the package."""


class CatconvError(Exception):
    """Base class for all package errors."""


class DataError(CatconvError, ValueError):
    """Input data cannot support the requested computation."""


class InsufficientVariationError(DataError):
    """The pooled marginal puts all mass on a single category."""


class ParseError(DataError):
    """A chain file could not be parsed.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(CatconvError, ArithmeticError):
    """An iterative numerical routine failed to converge."""
