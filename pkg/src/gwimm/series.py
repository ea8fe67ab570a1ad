"""Truncated power-series arithmetic on numpy coefficient vectors.

A series is a 1-d float array ``a`` with ``a[j]`` the coefficient of s**j.
All operations truncate at a caller-supplied order ``K`` (inclusive), i.e.
they work in the ring R[s]/(s**(K+1)).  Truncation is exact for coefficient
extraction: the coefficient of s**j in a product depends only on inputs of
index <= j, so low-order coefficients are never corrupted by the cutoff.
"""

from __future__ import annotations

import numpy as np
from scipy import fft as sp_fft

# Above this truncation order, products go through FFT instead of the
# schoolbook convolution.  Both paths must agree to 1e-12 (tested).
DIRECT_CONV_MAX = 512


def trim(a: np.ndarray, K: int) -> np.ndarray:
    """Truncate (or zero-pad) ``a`` to exactly K+1 coefficients."""
    a = np.asarray(a, dtype=float)
    if a.shape[0] >= K + 1:
        return a[: K + 1]
    out = np.zeros(K + 1)
    out[: a.shape[0]] = a
    return out


def series_mul(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """Product of two series, truncated at order K."""
    a = np.asarray(a, dtype=float)[: K + 1]
    b = np.asarray(b, dtype=float)[: K + 1]
    if K <= DIRECT_CONV_MAX:
        return trim(np.convolve(a, b), K)
    n = a.shape[0] + b.shape[0] - 1
    size = sp_fft.next_fast_len(n, real=True)
    fa = sp_fft.rfft(a, size)
    fb = sp_fft.rfft(b, size)
    return trim(sp_fft.irfft(fa * fb, size)[:n], K)


def series_mul_direct(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """Schoolbook product regardless of K; cross-check for the FFT path."""
    return trim(np.convolve(np.asarray(a, float)[: K + 1],
                            np.asarray(b, float)[: K + 1]), K)


def series_square(a: np.ndarray, K: int) -> np.ndarray:
    """a**2 truncated at order K (one forward transform on the FFT path)."""
    a = np.asarray(a, dtype=float)[: K + 1]
    if K <= DIRECT_CONV_MAX:
        return trim(np.convolve(a, a), K)
    n = 2 * a.shape[0] - 1
    size = sp_fft.next_fast_len(n, real=True)
    fa = sp_fft.rfft(a, size)
    return trim(sp_fft.irfft(fa * fa, size)[:n], K)


def series_pow(a: np.ndarray, m: int, K: int) -> np.ndarray:
    """a**m for integer m >= 0, by binary exponentiation."""
    if m < 0:
        raise ValueError("negative series power")
    result = np.zeros(K + 1)
    result[0] = 1.0
    base = trim(a, K)
    while m:
        if m & 1:
            result = series_mul(result, base, K)
        m >>= 1
        if m:
            base = series_square(base, K)
    return result


def series_recip(a: np.ndarray, K: int) -> np.ndarray:
    """1/a truncated at order K.  Requires a[0] != 0.

    Newton iteration x <- x*(2 - a*x), doubling the number of correct
    coefficients each step.
    """
    a = trim(a, K)
    if a[0] == 0.0:
        raise ValueError("series reciprocal needs a nonzero constant term")
    x = np.array([1.0 / a[0]])
    order = 0
    while order < K:
        order = min(2 * order + 1, K)
        ax = series_mul(a[: order + 1], x, order)
        ax = -ax
        ax[0] += 2.0
        x = series_mul(x, ax, order)
    return trim(x, K)


def series_compose_poly(coeffs: np.ndarray, g: np.ndarray, K: int) -> np.ndarray:
    """sum_m coeffs[m] * g**m truncated at order K, by Horner from the top."""
    coeffs = np.asarray(coeffs, dtype=float)
    g = trim(g, K)
    acc = np.zeros(K + 1)
    if coeffs.shape[0] == 0:
        return acc
    acc[0] = coeffs[-1]
    for m in range(coeffs.shape[0] - 2, -1, -1):
        acc = series_mul(acc, g, K)
        acc[0] += coeffs[m]
    return acc


def identity_series(K: int) -> np.ndarray:
    """The series of s itself."""
    out = np.zeros(K + 1)
    if K >= 1:
        out[1] = 1.0
    return out
