"""Exception hierarchy shared by all modules."""


class SpecregError(ValueError):
    """Base class for every error raised by this package."""


class DomainError(SpecregError):
    """An argument lies outside the domain of a function (e.g. sigma <= 0)."""


class ContractError(SpecregError):
    """Inputs violate a documented precondition (shapes, lengths, ranges)."""


class SingularMultiplierError(SpecregError):
    """A diagonal multiplier has a (numerically) zero entry."""


class BracketError(SpecregError):
    """The discrepancy threshold is not bracketed by the search interval."""

    def __init__(self, message, residual_lo=None, residual_hi=None):
        super().__init__(message)
        self.residual_lo = residual_lo
        self.residual_hi = residual_hi


class MonotonicityError(SpecregError):
    """A residual trace that must be nondecreasing in alpha is not."""
