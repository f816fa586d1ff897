"""Independent reference computations used by the tests.

Nothing here calls into ``specreg``; each routine takes the slow, obvious route.
"""

import mpmath
import numpy as np


def hankel1_0_series(x, dps=60):
    """H0^(1)(x) from the ascending series of J0 and Y0 (Euler-Mascheroni form)."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        z = x * x / 4
        term = mpmath.mpf(1)
        j0 = term
        y_sum = mpmath.mpf(0)
        harmonic = mpmath.mpf(0)
        k = 0
        while True:
            k += 1
            term = -term * z / (k * k)
            harmonic += mpmath.mpf(1) / k
            j0 += term
            y_sum -= term * harmonic
            if abs(term) * (1 + harmonic) < mpmath.mpf(10) ** (-30) and k > 5:
                break
        y0 = 2 / mpmath.pi * ((mpmath.log(x / 2) + mpmath.euler) * j0 + y_sum)
        return complex(float(j0), float(y0))


def hankel1_0_asymptotic(x, dps=30):
    """Hankel's large-argument expansion, truncated at its smallest term."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(x)
        total = mpmath.mpc(1)
        coef = mpmath.mpc(1)
        prev = mpmath.inf
        k = 0
        while True:
            k += 1
            coef = coef * (2 * k - 1) ** 2 / (k * 8 * x) * (-1j)
            if abs(coef) >= prev or abs(coef) < mpmath.mpf(10) ** (-25):
                break
            total += coef
            prev = abs(coef)
        phase = mpmath.exp(1j * (x - mpmath.pi / 4))
        h = mpmath.sqrt(2 / (mpmath.pi * x)) * phase * total
        return complex(h)


def hankel1_0_oracle(x):
    return hankel1_0_series(x) if x <= 20 else hankel1_0_asymptotic(x)


def circular_riemann_sum(f, gamma, h):
    """g_j = h * sum_j' f[(j - j') mod N] gamma[j'] by direct double loop."""
    n = len(f)
    g = np.zeros(n)
    for j in range(n):
        for jp in range(n):
            g[j] += f[(j - jp) % n] * gamma[jp]
    return h * g


def dft_direct(x):
    n = len(x)
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) @ np.asarray(x, dtype=complex)


def tikhonov_normal_equations(a, g, alpha):
    """Solve (A^T A + alpha I) x = A^T g with a dense solver."""
    return np.linalg.solve(a.T @ a + alpha * np.eye(a.shape[1]), a.T @ g)


def penalized_normal_equations(a, g, penalty_matrix):
    """Solve (A^T A + H^T H) x = A^T g."""
    return np.linalg.solve(a.T @ a + penalty_matrix.T @ penalty_matrix, a.T @ g)


def random_system(rng, m, n, smin=0.5, smax=2.0):
    """Random m x n matrix with singular values spread in [smin, smax]."""
    q1, _ = np.linalg.qr(rng.standard_normal((m, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.sort(rng.uniform(smin, smax, n))[::-1]
    return (q1 * s) @ q2.T
