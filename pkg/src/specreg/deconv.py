"""Periodic 1D deconvolution on the torus [-1, 1).

Signals live on the grid ``x_j = -1 + 2 j / N``.  Kernels are stored in
*offset layout*: ``values[j]`` is the kernel at the periodic offset ``j h``
(wrapped into ``[-1, 1)``), so index 0 is the zero offset and circular
convolution is a plain DFT product.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ContractError, SingularMultiplierError
from .filters import DiagonalMultiplier, FilterSpec, apply_filtered_inverse_diagonal, filter_value
from .numerics import dft_forward, dft_inverse, gaussian_noise

# Multiplier entries below this fraction of the largest one are treated as zero.
MULTIPLIER_FLUSH = 1e-14
# Allowed imaginary residue of a reconstruction, relative to its real part.
IMAG_RESIDUE = 1e-10


@dataclass(frozen=True)
class Grid1D:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ContractError(f"grid size must be a positive integer, got {self.n!r}")

    @property
    def h(self) -> float:
        return 2.0 / self.n

    @property
    def points(self) -> np.ndarray:
        return -1.0 + 2.0 * np.arange(self.n) / self.n

    @property
    def offsets(self) -> np.ndarray:
        """Periodic offsets ``j h`` wrapped into ``[-1, 1)``."""
        j = np.arange(self.n)
        return np.where(j < (self.n + 1) // 2, j, j - self.n) * self.h


@dataclass(frozen=True, eq=False)
class Signal1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ContractError(f"signal has shape {values.shape}, grid has {self.grid.n} points")
        if not np.all(np.isfinite(values)):
            raise ContractError("signal values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points


@dataclass(frozen=True)
class BoxKernel:
    """Normalized box ``c * indicator[-s_blur, s_blur]`` with ``c = 1 / (2 s_blur)``."""

    s_blur: float

    def __post_init__(self):
        if not (0 < self.s_blur < 1):
            raise ContractError(f"s_blur must lie in (0, 1), got {self.s_blur!r}")

    @property
    def height(self) -> float:
        return 1.0 / (2.0 * self.s_blur)

    def sample(self, grid: Grid1D) -> Signal1D:
        """Cell averages of the box over each grid cell, in offset layout.

        Interior samples equal the height exactly; the two edge cells carry the
        covered fraction, so ``h * sum(values) == 1`` up to rounding.
        """
        d, h, s = grid.offsets, grid.h, self.s_blur
        covered = np.clip(np.minimum(d + h / 2, s) - np.maximum(d - h / 2, -s), 0.0, h)
        return Signal1D(grid, self.height * covered / h)


class TestFunctionId(str, enum.Enum):
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"


def _smoothstep(t):
    # C-infinity transition from 0 (t <= 0) to 1 (t >= 1).
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def _f1(x):
    return np.maximum(0.0, 1.0 - np.abs(x) / 0.5)


def _f2(x):
    ramp = np.clip((x + 0.8) / 0.4, 0.0, 1.0)
    return np.where(x < 0.3, ramp, 0.0)


def _f3(x):
    window = 1.0 - _smoothstep((np.abs(x) - 0.6) / 0.3)
    return np.exp(-(x * x) / (2 * 0.15**2)) * window


_EVALUATORS = {TestFunctionId.F1: _f1, TestFunctionId.F2: _f2, TestFunctionId.F3: _f3}


@dataclass(frozen=True)
class TestFunction:
    """Reference signal on the torus with values in [0, 1].

    * F1: hat of half-width 0.5, continuous and piecewise linear.
    * F2: ramp from 0 at -0.8 to 1 at -0.4, plateau at 1, single jump to 0 at 0.3.
    * F3: Gaussian of width 0.15 times a C-infinity window vanishing for |x| >= 0.9.
    """

    __test__ = False  # keep pytest from collecting this class

    id: TestFunctionId

    def __call__(self, x):
        return _EVALUATORS[self.id](np.asarray(x, dtype=float))

    def sample(self, grid: Grid1D) -> Signal1D:
        return Signal1D(grid, self(grid.points))


def make_test_function(id) -> TestFunction:
    return TestFunction(TestFunctionId(id))


def discrete_convolution(f: Signal1D, gamma: Signal1D) -> Signal1D:
    """Circular Riemann sum ``g_j = h * sum_j' f[(j - j') mod N] * gamma[j']``.

    ``gamma`` is read in offset layout.  Evaluated through the DFT.
    """
    if f.grid != gamma.grid:
        raise ContractError(f"grid mismatch: {f.grid.n} vs {gamma.grid.n} points")
    g = dft_inverse(dft_forward(f.values) * dft_forward(gamma.values)).real * f.grid.h
    return Signal1D(f.grid, g)


def synthesize_measurement(
    tf: TestFunction,
    kernel: BoxKernel,
    n: int,
    noise_std: float,
    seed: int,
    oversample: int = 10,
) -> tuple[Signal1D, Signal1D]:
    """Blur ``tf`` on an ``n * oversample`` grid, subsample to ``n`` points, add noise.

    Returns ``(clean, noisy)``.  With ``noise_std == 0`` the two are equal.
    """
    if oversample < 1 or int(oversample) != oversample:
        raise ContractError(f"oversample must be a positive integer, got {oversample!r}")
    if n < 2:
        raise ContractError(f"n must be >= 2, got {n}")
    if noise_std < 0:
        raise ContractError(f"noise_std must be nonnegative, got {noise_std!r}")
    fine = Grid1D(n * oversample)
    g_fine = discrete_convolution(tf.sample(fine), kernel.sample(fine))
    grid = Grid1D(n)
    clean = Signal1D(grid, g_fine.values[::oversample])
    if noise_std == 0:
        return clean, Signal1D(grid, clean.values.copy())
    noisy = clean.values + gaussian_noise(n, noise_std, seed)
    return clean, Signal1D(grid, noisy)


def kernel_multiplier(kernel: BoxKernel | Signal1D, grid: Grid1D) -> DiagonalMultiplier:
    """``h * DFT(gamma)``, the Riemann approximation of the kernel's Fourier transform."""
    gamma = kernel.sample(grid) if isinstance(kernel, BoxKernel) else kernel
    if gamma.grid != grid:
        raise ContractError("kernel and signal grids differ")
    values = grid.h * dft_forward(gamma.values)
    mag = np.abs(values)
    tiny = np.flatnonzero(mag < MULTIPLIER_FLUSH * mag.max())
    if tiny.size:
        raise SingularMultiplierError(
            f"kernel transform is numerically zero at {tiny.size} frequency(ies), first k={tiny[0]}"
        )
    return DiagonalMultiplier(values)


class Deconvolution:
    """Cached Fourier-domain view of one measurement, for fast parameter sweeps.

    Reconstruction, residual norm and error all reuse the transformed data and
    kernel; ``residual_norm`` is evaluated via Parseval so it is exactly
    monotone in ``alpha`` for a fixed ``tau``.
    """

    def __init__(self, data: Signal1D, kernel: BoxKernel | Signal1D):
        self.data = data
        self.grid = data.grid
        self.multiplier = kernel_multiplier(kernel, self.grid)
        self.data_hat = self.grid.h * dft_forward(data.values)

    @cached_property
    def _modulus(self):
        return np.abs(self.multiplier.values)

    def reconstruct(self, spec: FilterSpec) -> Signal1D:
        f_hat = apply_filtered_inverse_diagonal(self.multiplier, spec, self.data_hat)
        f = dft_inverse(f_hat) / self.grid.h
        scale = max(np.linalg.norm(f.real), np.finfo(float).tiny)
        residue = np.linalg.norm(f.imag) / scale
        if residue > IMAG_RESIDUE and np.linalg.norm(f.imag) > 0:
            raise ContractError(f"reconstruction has imaginary residue {residue:.3g}")
        return Signal1D(self.grid, f.real)

    def residual_norm(self, spec: FilterSpec) -> float:
        """``||gamma * f_alpha - g||_2`` on the sample grid."""
        q = np.asarray(filter_value(spec, self._modulus))
        coeffs = (1.0 - q) * dft_forward(self.data.values)
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2) / self.grid.n))

    def relative_error(self, spec: FilterSpec, truth: Signal1D) -> float:
        return relative_error(self.reconstruct(spec), truth)


def reconstruct(noisy: Signal1D, kernel: BoxKernel | Signal1D, spec: FilterSpec) -> Signal1D:
    """Filtered inverse ``U^-1 [q(alpha, |U gamma|) / U gamma] U g`` with DFT-based ``U``."""
    return Deconvolution(noisy, kernel).reconstruct(spec)


def relative_error(recon, truth) -> float:
    r = recon.values if isinstance(recon, Signal1D) else np.asarray(recon, dtype=float)
    t = truth.values if isinstance(truth, Signal1D) else np.asarray(truth, dtype=float)
    if r.shape != t.shape:
        raise ContractError(f"shape mismatch: {r.shape} vs {t.shape}")
    norm = np.linalg.norm(t)
    if norm == 0:
        raise ContractError("relative error against a zero signal is undefined")
    return float(np.linalg.norm(r - t) / norm)
