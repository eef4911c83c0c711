"""Exception hierarchy shared across the package."""


class ModclassError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ModclassError, ValueError):
    """Invalid parameters, orders, shapes, or config files."""


class DataError(ModclassError):
    """Missing, corrupt, or inconsistent data files."""


class NumericError(ModclassError, ArithmeticError):
    """Numerically undefined or degenerate computation (e.g. zero-power SNR)."""
