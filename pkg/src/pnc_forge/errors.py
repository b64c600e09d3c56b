"""Exception types raised across the package."""


class PncError(Exception):
    """Base class for all package errors."""


class ContractViolation(PncError, ValueError):
    """An operation was called with arguments that break its preconditions."""


class SingularMatrixError(PncError, ArithmeticError):
    """A GF(2) matrix that must be inverted is singular."""


class InvalidChannelError(PncError, ValueError):
    pass


class ConfigError(PncError, ValueError):
    """Invalid experiment or scheme configuration.

    ``field`` names the offending key when one is known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class SelectionFailure(PncError, RuntimeError):
    """No non-singular global mapping could be assembled from the candidate pools."""


class StoreParseError(PncError, ValueError):
    pass


class IncompatibleStoreError(PncError, ValueError):
    """A candidate store was built under different conventions than the running code."""
