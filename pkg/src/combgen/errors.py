"""Exception types shared across the package."""


class CombgenError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CombgenError):
    """Malformed input: bad spec, bad file, inconsistent arguments."""


class InvariantError(CombgenError):
    """An internal exactness check failed; indicates a bug, not bad input."""


class AttackExhaustedError(CombgenError):
    """Every candidate beam was rejected; recovery failed."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
