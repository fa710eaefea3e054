"""Exception hierarchy shared across the toolkit.

CLI exit codes: ConfigError -> 2, NumericError (and subclasses) -> 3.
"""


class StablemcError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(StablemcError):
    """Invalid or inconsistent run configuration."""


class NumericError(StablemcError):
    """A numerical routine failed to meet its accuracy contract."""


class QuadratureError(NumericError):
    """A quadrature self-check exceeded its tolerance."""


class InvalidParameterError(StablemcError, ValueError):
    """Parameters outside the mathematically admissible range."""
