"""Exception types shared across the package."""


class WsneError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(WsneError, ValueError):
    pass


class CapacityError(WsneError):
    """An object would exceed a configured size limit."""


class BudgetExceeded(WsneError):
    """An exhaustive enumeration ran past its work budget.

    ``partial`` carries whatever was computed before stopping.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
