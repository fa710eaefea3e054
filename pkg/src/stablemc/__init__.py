"""stablemc: stable-limit Monte Carlo toolkit for heavy-tailed Markov chains."""

__version__ = "0.1.0"

from .errors import ConfigError, InvalidParameterError, NumericError, QuadratureError

__all__ = [
    "__version__",
    "ConfigError",
    "InvalidParameterError",
    "NumericError",
    "QuadratureError",
]
