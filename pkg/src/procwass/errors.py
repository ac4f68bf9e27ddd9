"""Exception types raised across the package."""


class ProcwassError(Exception):
    """Base class for all package errors."""


class DimensionError(ProcwassError, ValueError):
    """Invalid or mismatched array dimensions."""


class NegativeSigmaError(ProcwassError, ValueError):
    pass


class SizeCapError(ProcwassError, ValueError):
    """Input too large for an exhaustive or net-based routine."""


class RankError(ProcwassError, ValueError):
    """A Gram matrix cannot be factored in the requested dimension."""


class ConfigError(ProcwassError, ValueError):
    """Invalid sweep or method configuration."""


class NumericalError(ProcwassError, ArithmeticError):
    pass
