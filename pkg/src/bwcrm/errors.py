"""Exception hierarchy shared by all bwcrm modules."""


class BwcrmError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(BwcrmError, ValueError):
    """Operands live in spaces of different dimension."""


class NonFiniteError(BwcrmError, ValueError):
    """A NaN or infinite entry reached an operation."""


class DegenerateHyperplaneError(BwcrmError, ValueError):
    """A hyperplane was requested with a zero normal vector."""


class InconsistentSystemError(BwcrmError, ValueError):
    """The linear system defining an affine set has no solution."""


class NumericalRankError(BwcrmError, ArithmeticError):
    """A factorization failed or produced a meaningless rank."""


class DegeneracyError(BwcrmError, ArithmeticError):
    """A circumcenter or replacement step could not be carried out."""


class InsufficientDataError(BwcrmError, ValueError):
    """Not enough samples to estimate a quantity."""


class MatrixMarketError(BwcrmError, ValueError):
    """Malformed Matrix Market input.

    ``lineno`` is the 1-based line of the offending text, or ``None`` when
    the problem is the file as a whole (e.g. truncated data).
    """

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
