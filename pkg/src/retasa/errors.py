"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4. Plain ValueError is reserved for programming errors
(bad argument values on in-process API calls).
"""


class RetasaError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RetasaError):
    """The experiment configuration cannot be parsed or is invalid."""


class DataError(RetasaError):
    """Input data is missing, malformed, or degenerate."""


class NumericalError(RetasaError):
    """A numerical computation failed or produced an unusable result."""
