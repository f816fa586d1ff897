"""Spectral filters interpolating between Tikhonov regularization and spectral cutoff.

A filter ``q(alpha, sigma)`` reshapes the spectrum of a pseudo-inverse: the
regularized inverse multiplies each data coefficient by ``q(alpha, sigma) / sigma``
instead of ``1 / sigma``.  The interpolating family is

    q_tau(alpha, sigma) = 1 / (1 + (sqrt(alpha) / sigma) ** (2 + tau))

with ``tau = 0`` equal to Tikhonov and ``tau -> inf`` approaching the cutoff
at ``sigma = sqrt(alpha)``.  Everything here works on scalars and on numpy
arrays alike.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError, SingularMultiplierError

# exp(700) is close to the double overflow point; beyond it q is flushed to 0.
_EXP_FLUSH = 700.0

# Triplets below this fraction of the largest singular value are dropped.
RANK_CUTOFF = 1e-12


class FilterKind(str, enum.Enum):
    INTERPOLATING = "interpolating"
    TIKHONOV = "tikhonov"
    CUTOFF = "cutoff"


@dataclass(frozen=True)
class FilterSpec:
    """Filter parameters: interpolation exponent ``tau`` and regularization ``alpha``."""

    tau: float = 0.0
    alpha: float = 1.0
    kind: FilterKind = FilterKind.INTERPOLATING

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ContractError(f"alpha must be positive and finite, got {self.alpha!r}")
        if not (np.isfinite(self.tau) and self.tau >= 0):
            raise ContractError(f"tau must be nonnegative and finite, got {self.tau!r}")

    def with_alpha(self, alpha: float) -> "FilterSpec":
        return FilterSpec(self.tau, alpha, self.kind)

    @classmethod
    def tikhonov(cls, alpha: float) -> "FilterSpec":
        return cls(0.0, alpha, FilterKind.TIKHONOV)

    @classmethod
    def cutoff(cls, alpha: float) -> "FilterSpec":
        return cls(0.0, alpha, FilterKind.CUTOFF)


def _check_sigma(sigma):
    s = np.asarray(sigma, dtype=float)
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise DomainError("sigma must be finite and strictly positive")
    return s


def _scalar_or_array(value, like):
    return float(value) if np.ndim(like) == 0 else value


def filter_value(spec: FilterSpec, sigma):
    """Evaluate the filter ``q(alpha, sigma)``.

    Parameters
    ----------
    spec : FilterSpec
        Filter kind and parameters.
    sigma : float or array_like
        Strictly positive singular values (or multiplier moduli).

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``.  The interpolating filter is flushed to exactly 0
        where ``(sqrt(alpha)/sigma)**(2+tau)`` would exceed ``exp(700)``.
    """
    s = _check_sigma(sigma)
    alpha = spec.alpha
    if spec.kind is FilterKind.TIKHONOV:
        s2 = s * s
        q = s2 / (alpha + s2)
    elif spec.kind is FilterKind.CUTOFF:
        root = np.sqrt(alpha)
        q = np.where(s > root, 1.0, np.where(s == root, 0.5, 0.0))
    else:
        p = 2.0 + spec.tau
        log_ratio = p * (0.5 * np.log(alpha) - np.log(s))
        flushed = log_ratio > _EXP_FLUSH
        with np.errstate(over="ignore", under="ignore"):
            ratio = np.power(np.sqrt(alpha) / s, p)
        q = np.where(flushed, 0.0, 1.0 / (1.0 + np.where(flushed, 0.0, ratio)))
    return _scalar_or_array(q, sigma)


def filter_gain(spec: FilterSpec, sigma):
    """Multiplier ``q(alpha, sigma) / sigma`` applied to data coefficients."""
    s = _check_sigma(sigma)
    gain = np.asarray(filter_value(spec, s)) / s
    return _scalar_or_array(gain, sigma)


def penalty_multiplier(spec: FilterSpec, sigma):
    """Diagonal entry ``sqrt(alpha) * (sqrt(alpha)/sigma)**(tau/2)`` of the penalty operator.

    Minimizing ``|g - T f|^2 + |H f|^2`` with ``H`` diagonal in the right
    singular basis with these entries reproduces the interpolating filter.
    The exact cutoff has no finite penalty and is rejected.
    """
    if spec.kind is FilterKind.CUTOFF:
        raise ContractError("the exact cutoff filter has no finite penalty operator")
    s = _check_sigma(sigma)
    tau = 0.0 if spec.kind is FilterKind.TIKHONOV else spec.tau
    root = np.sqrt(spec.alpha)
    value = root * np.power(root / s, 0.5 * tau)
    return _scalar_or_array(value, sigma)


@dataclass(frozen=True, eq=False)
class SingularSystem:
    """Thin singular triplets ``A = left @ diag(sigma) @ right.T``.

    Triplets with ``sigma < 1e-12 * sigma[0]`` are dropped on construction.
    Orthonormality of the columns is verified unless ``check=False``.
    """

    sigma: np.ndarray
    left: np.ndarray
    right: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if sigma.ndim != 1 or left.ndim != 2 or right.ndim != 2:
            raise ContractError("sigma must be 1-D and singular vectors 2-D")
        if left.shape[1] != sigma.size or right.shape[1] != sigma.size:
            raise ContractError(
                f"shape mismatch: sigma {sigma.shape}, left {left.shape}, right {right.shape}"
            )
        if not np.all(np.isfinite(sigma)):
            raise ContractError("singular values must be finite")
        if np.any(np.diff(sigma) > 0):
            raise ContractError("singular values must be sorted nonincreasing")
        keep = sigma > 0
        if sigma.size:
            keep &= sigma >= RANK_CUTOFF * sigma[0]
        sigma, left, right = sigma[keep], left[:, keep], right[:, keep]
        if self.check:
            for name, basis in (("left", left), ("right", right)):
                gram = basis.T @ basis
                dev = np.linalg.norm(gram - np.eye(gram.shape[0]))
                if dev > 1e-9:
                    raise ContractError(f"{name} singular vectors are not orthonormal ({dev:.3g})")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def rank(self) -> int:
        return self.sigma.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.left.shape[0], self.right.shape[0]

    def matrix(self) -> np.ndarray:
        return (self.left * self.sigma) @ self.right.T


def apply_filtered_inverse_svd(system: SingularSystem, spec: FilterSpec, data) -> np.ndarray:
    """Return ``sum_n q(alpha, sigma_n) / sigma_n * <u_n, data> v_n``."""
    data = np.asarray(data, dtype=float)
    if data.shape[0] != system.left.shape[0]:
        raise ContractError(
            f"data length {data.shape[0]} does not match {system.left.shape[0]} rows"
        )
    if system.rank == 0:
        return np.zeros((system.right.shape[0],) + data.shape[1:])
    coeffs = system.left.T @ data
    gain = np.asarray(filter_gain(spec, system.sigma))
    if coeffs.ndim > 1:
        gain = gain[:, None]
    return system.right @ (gain * coeffs)


@dataclass(frozen=True, eq=False)
class DiagonalMultiplier:
    """Complex multiplier of a unitarily diagonalized operator (e.g. a DFT symbol)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 1:
            raise ContractError("multiplier must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ContractError("multiplier entries must be finite")
        zero = np.flatnonzero(values == 0)
        if zero.size:
            raise SingularMultiplierError(
                f"multiplier vanishes at {zero.size} index(es), first at {zero[0]}"
            )
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def apply_filtered_inverse_diagonal(
    mult: DiagonalMultiplier, spec: FilterSpec, data_hat
) -> np.ndarray:
    """Elementwise ``q(alpha, |m_k|) * data_hat_k / m_k``.

    The filter sees the modulus of each entry while the division keeps the
    full complex value, so the phase of the operator is inverted exactly.
    """
    data_hat = np.asarray(data_hat, dtype=complex)
    if data_hat.shape != mult.values.shape:
        raise ContractError(
            f"data length {data_hat.shape} does not match multiplier {mult.values.shape}"
        )
    q = np.asarray(filter_value(spec, np.abs(mult.values)))
    return q * data_hat / mult.values
