"""Spectral regularization filters interpolating between Tikhonov and spectral cutoff."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BracketError,
    ContractError,
    DomainError,
    MonotonicityError,
    SingularMultiplierError,
    SpecregError,
)
from .filters import (  # noqa: E402
    DiagonalMultiplier,
    FilterKind,
    FilterSpec,
    SingularSystem,
    apply_filtered_inverse_diagonal,
    apply_filtered_inverse_svd,
    filter_gain,
    filter_value,
    penalty_multiplier,
)

__all__ = [
    "BracketError",
    "ContractError",
    "DiagonalMultiplier",
    "DomainError",
    "FilterKind",
    "FilterSpec",
    "MonotonicityError",
    "SingularMultiplierError",
    "SingularSystem",
    "SpecregError",
    "apply_filtered_inverse_diagonal",
    "apply_filtered_inverse_svd",
    "filter_gain",
    "filter_value",
    "penalty_multiplier",
]
