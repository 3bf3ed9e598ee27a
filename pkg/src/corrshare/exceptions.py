class CorrShareError(Exception):
    """Base class for errors raised by this package."""


class ParseError(CorrShareError, ValueError):
    """Malformed input file."""


class ValidationError(CorrShareError, ValueError):
    """Input parsed but violates a data contract."""


class NumericalError(CorrShareError, ArithmeticError):
    """A statistic could not be computed for numerical reasons."""


class ExtensionPointError(CorrShareError, NotImplementedError):
    """Outcome type that has no score implementation yet."""
