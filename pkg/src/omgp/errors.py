class OmgpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(OmgpError, ValueError):
    pass


class FactorizationError(OmgpError, ArithmeticError):
    """Cholesky factorization failed even after jitter escalation."""

    def __init__(self, message, component=None):
        if component is not None:
            message = f"component {component}: {message}"
        super().__init__(message)
        self.component = component


class ConfigError(OmgpError, ValueError):
    pass


class DataError(OmgpError, ValueError):
    pass
