"""Choice of the regularization parameter alpha.

Two rules are provided: the discrepancy principle (largest alpha whose
residual stays below ``safety * noise_std * sqrt(n)``), found by bisection in
``log(alpha)``, and the oracle sweep that picks the grid value with the lowest
reconstruction error against a known truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import BracketError, ContractError, MonotonicityError


def expected_noise_norm(noise_std: float, n: int) -> float:
    """``noise_std * sqrt(n)``, used as a surrogate for ``E ||eps||_2``."""
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    return noise_std * math.sqrt(n)


@dataclass(frozen=True)
class MorozovConfig:
    noise_std: float
    n: int
    safety: float = 1.1
    alpha_bracket: tuple[float, float] = (1e-8, 10.0)
    tol: float = 1e-3

    def __post_init__(self):
        lo, hi = self.alpha_bracket
        if not (self.noise_std > 0):
            raise ContractError(f"noise_std must be positive, got {self.noise_std!r}")
        if self.safety < 1:
            raise ContractError(f"safety factor must be >= 1, got {self.safety!r}")
        if not (0 < lo < hi):
            raise ContractError(f"alpha bracket must satisfy 0 < lo < hi, got {self.alpha_bracket!r}")
        if not (0 < self.tol < 1):
            raise ContractError(f"tol must lie in (0, 1), got {self.tol!r}")

    @property
    def threshold(self) -> float:
        return self.safety * expected_noise_norm(self.noise_std, self.n)


@dataclass
class MorozovResult:
    alpha: float
    residual: float
    threshold: float
    saturated: bool = False
    trace: list[tuple[float, float]] = field(default_factory=list)


def _check_monotone(trace):
    ordered = sorted(trace)
    for (a0, r0), (a1, r1) in zip(ordered, ordered[1:]):
        if r1 < r0:
            raise MonotonicityError(
                f"residual decreases from {r0!r} at alpha={a0!r} to {r1!r} at alpha={a1!r}"
            )


def morozov_alpha(
    residual: Callable[[float], float], cfg: MorozovConfig, strict: bool = False
) -> MorozovResult:
    """Largest alpha in the bracket with ``residual(alpha) <= cfg.threshold``.

    ``residual`` must be nondecreasing in alpha; the evaluation trace is checked.
    Bisection runs on ``log(alpha)`` until ``hi / lo <= 1 + tol``, so the result
    satisfies the threshold while ``alpha * (1 + tol)`` does not.

    If the threshold is not reached even at the top of the bracket, the upper
    end is returned with ``saturated=True`` (or :class:`BracketError` is raised
    when ``strict``).  A residual above the threshold at the lower end always
    raises :class:`BracketError`.
    """
    threshold = cfg.threshold
    lo, hi = cfg.alpha_bracket
    trace = []

    def evaluate(alpha):
        r = float(residual(alpha))
        trace.append((alpha, r))
        return r

    r_lo, r_hi = evaluate(lo), evaluate(hi)
    if r_lo > threshold or (strict and r_hi <= threshold):
        raise BracketError(
            f"threshold {threshold:.6g} not bracketed: residual({lo:g})={r_lo:.6g}, "
            f"residual({hi:g})={r_hi:.6g}",
            residual_lo=r_lo,
            residual_hi=r_hi,
        )
    if r_hi <= threshold:
        _check_monotone(trace)
        return MorozovResult(hi, r_hi, threshold, saturated=True, trace=trace)

    log_lo, log_hi = math.log(lo), math.log(hi)
    limit = math.log1p(cfg.tol)
    while log_hi - log_lo > limit:
        log_mid = 0.5 * (log_lo + log_hi)
        r = evaluate(math.exp(log_mid))
        if r <= threshold:
            log_lo, r_lo = log_mid, r
        else:
            log_hi = log_mid
    _check_monotone(trace)
    alpha = math.exp(log_lo) if log_lo != math.log(lo) else lo
    return MorozovResult(alpha, r_lo, threshold, trace=trace)


@dataclass(frozen=True, eq=False)
class SweepConfig:
    alpha_grid: np.ndarray = field(default_factory=lambda: np.logspace(-8, 1, 200))

    def __post_init__(self):
        grid = np.asarray(self.alpha_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ContractError("alpha grid must be a nonempty 1-D sequence")
        if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise ContractError("alpha grid must be positive and strictly increasing")
        object.__setattr__(self, "alpha_grid", grid)

    @classmethod
    def logspace(cls, lo: float, hi: float, points: int) -> "SweepConfig":
        return cls(np.logspace(math.log10(lo), math.log10(hi), points))


class OptimalChoice(NamedTuple):
    alpha: float
    error: float


def optimal_alpha(
    error: Callable[[float], float],
    cfg: SweepConfig | None = None,
    trace: list | None = None,
) -> OptimalChoice:
    """Grid minimizer of ``error``; ties go to the larger alpha.

    Pass a list as ``trace`` to collect the ``(alpha, error)`` pairs.
    """
    cfg = cfg or SweepConfig()
    best = None
    for alpha in cfg.alpha_grid:
        alpha = float(alpha)
        e = float(error(alpha))
        if trace is not None:
            trace.append((alpha, e))
        if best is None or e <= best.error:
            best = OptimalChoice(alpha, e)
    return best
