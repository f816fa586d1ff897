"""Numerical kernels: DFT, dense SVD, seeded Gaussian noise, and the Hankel function H0^(1).

The DFT and SVD delegate to numpy (pocketfft handles arbitrary lengths such
as 1001 = 7*11*13; LAPACK gesdd for the SVD).  Noise is Box-Muller over the
PCG64 generator so fixtures stay stable.  J0 and Y0 use the classic rational
approximations on ``(0, 8)`` and amplitude-phase asymptotics beyond, with
absolute error below ~2e-8.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DomainError
from .filters import SingularSystem

_TWO_OVER_PI = 2.0 / np.pi
_QUARTER_PI = np.pi / 4.0


def _as_complex_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise ContractError("expected a 1-D vector")
    if x.size == 0:
        raise ContractError("DFT of an empty vector is undefined")
    return x


def dft_forward(x) -> np.ndarray:
    """``X_k = sum_j x_j exp(-2 pi i j k / n)``."""
    return np.fft.fft(_as_complex_vector(x))


def dft_inverse(X) -> np.ndarray:
    """Inverse of :func:`dft_forward` (carries the ``1/n`` factor)."""
    return np.fft.ifft(_as_complex_vector(X))


def svd(a) -> SingularSystem:
    """Thin SVD of a real dense matrix as a :class:`SingularSystem`."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ContractError(f"expected a nonempty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix has non-finite entries")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return SingularSystem(s, u, vt.T)


def gaussian_noise(n: int, stddev: float, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. N(0, stddev^2) samples, reproducibly.

    Uniform pairs ``(u1, u2)`` come from ``numpy.random.PCG64(seed)`` via
    ``Generator.random``; each pair yields ``r cos(2 pi u2)`` and
    ``r sin(2 pi u2)`` with ``r = sqrt(-2 log(1 - u1))``, interleaved.
    """
    if n < 1:
        raise ContractError(f"n must be >= 1, got {n}")
    if not (stddev > 0 and np.isfinite(stddev)):
        raise ContractError(f"stddev must be positive, got {stddev!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    pairs = (n + 1) // 2
    u = rng.random((pairs, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    z = np.empty((pairs, 2))
    z[:, 0] = radius * np.cos(angle)
    z[:, 1] = radius * np.sin(angle)
    return stddev * z.ravel()[:n]


def _asymptotic_parts(x):
    z = 8.0 / x
    y = z * z
    p0 = 1.0 + y * (-0.1098628627e-2 + y * (0.2734510407e-4
         + y * (-0.2073370639e-5 + y * 0.2093887211e-6)))
    q0 = -0.1562499995e-1 + y * (0.1430488765e-3 + y * (-0.6911147651e-5
         + y * (0.7621095161e-6 - y * 0.934935152e-7)))
    return np.sqrt(_TWO_OVER_PI / x), x - _QUARTER_PI, p0, z * q0


def _j0_small(x):
    y = x * x
    num = 57568490574.0 + y * (-13362590354.0 + y * (651619640.7
          + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))))
    den = 57568490411.0 + y * (1029532985.0 + y * (9494680.718
          + y * (59272.64853 + y * (267.8532712 + y))))
    return num / den


def _y0_small(x):
    y = x * x
    num = -2957821389.0 + y * (7062834065.0 + y * (-512359803.6
          + y * (10879881.29 + y * (-86327.92757 + y * 228.4622733))))
    den = 40076544269.0 + y * (745249964.8 + y * (7189466.438
          + y * (47447.26470 + y * (226.1030244 + y))))
    return num / den + _TWO_OVER_PI * _j0_small(x) * np.log(x)


def _bessel_pair(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("argument must be finite and strictly positive")
    shape = x.shape
    x = x.reshape(-1)
    j0 = np.empty_like(x)
    y0 = np.empty_like(x)
    small = x < 8.0
    xs = x[small]
    j0[small] = _j0_small(xs)
    y0[small] = _y0_small(xs)
    amp, phase, p0, q0 = _asymptotic_parts(x[~small])
    c, s = np.cos(phase), np.sin(phase)
    j0[~small] = amp * (c * p0 - s * q0)
    y0[~small] = amp * (s * p0 + c * q0)
    return j0.reshape(shape), y0.reshape(shape)


def bessel_j0(x):
    j0, _ = _bessel_pair(x)
    return float(j0) if np.ndim(x) == 0 else j0


def bessel_y0(x):
    _, y0 = _bessel_pair(x)
    return float(y0) if np.ndim(x) == 0 else y0


def hankel1_0(x):
    """Hankel function of the first kind, order zero: ``J0(x) + i Y0(x)`` for ``x > 0``."""
    j0, y0 = _bessel_pair(x)
    h = j0 + 1j * y0
    return complex(h) if np.ndim(x) == 0 else h
