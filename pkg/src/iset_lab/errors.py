"""Exception types shared across the package."""


class UsageError(ValueError):
    """Caller violated an operation precondition (bad index, malformed pair, ...)."""


class DomainError(ValueError):
    """Numeric argument outside the admissible domain of a formula."""


class ProtocolViolation(RuntimeError):
    """The online round protocol was broken (re-select, bad decide, early finalize)."""


class InvariantBreach(RuntimeError):
    """An internal consistency check failed; indicates a bug, not a caller error."""


class InfeasibleParamsError(ValueError):
    """Derived algorithm parameters do not fit the instance size."""

    def __init__(self, message: str, inequality: str):
        super().__init__(message)
        self.inequality = inequality


class LimitExceeded(RuntimeError):
    """Requested exhaustive computation is larger than the configured guard."""
