"""Law of the first immigrant generation with descendants alive at the
horizon, and its joint decomposition with the population size.

With cohorts Z^(i) started by the generation-i immigrants, theta_n is the
smallest i <= n with Z^(i)_{n-i} > 0.  Its law is exact in terms of the
cumulative products F:

    P(theta_n > l)  = F(n) / F(n-l),
    P(theta_n = l)  = (1 - h(f_{n-l}(0))) * F(n) / F(n-l+1),

and the event that no cohort survives carries the atom F(n) = P(Y_n = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import Model
from .pgf import (
    DEFAULT_DEFICIT_CEILING,
    IterateCache,
    TruncatedPmf,
    _iterate_series_chain,
    exact_pmf_Y,
    exact_pmf_Z,
)
from .series import series_mul


@dataclass
class ThetaLaw:
    """Distribution of theta_n; pmf[l] = P(theta_n = l) for l = 1..n
    (pmf[0] is unused and zero), plus the no-survivor atom."""

    n: int
    pmf: np.ndarray
    atom_none: float

    def total(self) -> float:
        return math.fsum(self.pmf.tolist()) + self.atom_none


def theta_survival(cache: IterateCache, n: int, l: int) -> float:
    """P(theta_n > l) = F(n)/F(n-l)."""
    if not (0 <= l <= n):
        raise ValueError(f"need 0 <= l <= n, got l={l}, n={n}")
    if n > cache.N:
        raise ValueError(f"cache horizon {cache.N} < n={n}")
    return cache.F_ratio(n, n - l)


def theta_pmf(cache: IterateCache, n: int) -> ThetaLaw:
    """Full law of theta_n from the iterate cache."""
    if n > cache.N:
        raise ValueError(f"cache horizon {cache.N} < n={n}")
    pmf = np.zeros(n + 1)
    if n >= 1:
        m = n - np.arange(1, n + 1)  # cohort age at the horizon
        ratio = np.where(
            cache.zero_factors[n] == cache.zero_factors[m + 1],
            np.exp(cache.logF_pos[n] - cache.logF_pos[m + 1]),
            0.0,
        )
        pmf[1:] = cache.one_minus_hfj0[m] * ratio
    return ThetaLaw(n=n, pmf=pmf, atom_none=float(cache.F[n]))


def joint_Y_theta(
    model: Model,
    cache: IterateCache,
    n: int,
    k: int,
    l: int,
    K: int,
    deficit_ceiling: float = DEFAULT_DEFICIT_CEILING,
) -> float:
    """P(Y_n = k, theta_n = l), by restricting the surviving cohort's law
    to positive values, convolving with an independent Y_{n-l}, and scaling
    by the exact product of the younger cohorts' extinction probabilities."""
    if not (1 <= l <= n):
        raise ValueError(f"need 1 <= l <= n, got l={l}, n={n}")
    if k > K:
        raise ValueError(f"k={k} exceeds truncation bound K={K}")
    if k < 0:
        return 0.0
    m = n - l
    zpmf = exact_pmf_Z(model, m, K, deficit_ceiling)
    ypmf = exact_pmf_Y(model, m, K, 0, deficit_ceiling)
    z = zpmf.probs.copy()
    z[0] = 0.0  # the surviving cohort is conditioned positive
    conv_k = float(np.dot(z[: k + 1], ypmf.probs[k::-1]))
    return conv_k * cache.F_ratio(n, m + 1)


def joint_Y_theta_window(
    model: Model,
    cache: IterateCache,
    n: int,
    k: int,
    K: int,
    m_max: int | None = None,
    deficit_ceiling: float = DEFAULT_DEFICIT_CEILING,
) -> np.ndarray:
    """P(Y_n = k, theta_n = n - m) for all cohort ages m = 0..m_max, built
    incrementally along one series chain (one multiply per age)."""
    if m_max is None:
        m_max = n - 1
    m_max = min(m_max, n - 1)
    out = np.zeros(m_max + 1)
    imm = model.immigration
    acc = np.zeros(K + 1)
    acc[0] = 1.0  # law of Y_0
    idx = np.arange(m_max + 2)
    scale = np.where(
        cache.zero_factors[n] == cache.zero_factors[idx],
        np.exp(cache.logF_pos[n] - cache.logF_pos[idx]),
        0.0,
    )
    for m, g in _iterate_series_chain(model, m_max, K):
        factor = imm.apply_to_series(g, K)
        z = factor.copy()
        z[0] = 0.0
        out[m] = float(np.dot(z[: k + 1], acc[k::-1])) * scale[m + 1]
        if m < m_max:
            acc = series_mul(acc, factor, K)
    return out
