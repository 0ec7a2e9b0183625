"""Truncated Zipf popularity laws and closed-form bounds on their partial sums.

The same law type models both request popularity (exponent gamma_r) and the
randomized cache-placement distribution (exponent gamma_c).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameterError,
    InvalidRangeError,
    UnsupportedExponentError,
)


@dataclass(frozen=True)
class ZipfLaw:
    """Probability law p(i) proportional to 1/i^exponent over ranks 1..m."""

    exponent: float
    m: int
    pmf: np.ndarray
    cdf: np.ndarray

    def quantile(self, u: float) -> int:
        """Inverse-cdf lookup: the smallest rank whose cdf exceeds u."""
        idx = int(np.searchsorted(self.cdf, u, side="right"))
        return min(idx, self.m - 1) + 1

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one rank by inverse transform of a single uniform."""
        return self.quantile(rng.random())

    def sample_n(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Vectorized inverse-transform draws; returns 1-based ranks."""
        idx = np.searchsorted(self.cdf, rng.random(size), side="right")
        return np.minimum(idx, self.m - 1).astype(np.int64) + 1


def make_zipf(gamma: float, m: int) -> ZipfLaw:
    """Build the truncated Zipf law with exponent gamma on ranks 1..m."""
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 1:
        raise InvalidParameterError(f"library size m must be a positive integer, got {m!r}")
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0:
        raise InvalidParameterError(f"exponent must be finite and nonnegative, got {gamma!r}")
    ranks = np.arange(1, m + 1, dtype=np.float64)
    weights = ranks ** (-gamma)
    pmf = weights / math.fsum(weights)
    cdf = np.cumsum(pmf)
    pmf.setflags(write=False)
    cdf.setflags(write=False)
    return ZipfLaw(gamma, int(m), pmf, cdf)


def _check_interval(a: int, b: int) -> None:
    if a < 1:
        raise InvalidRangeError(f"interval start must be >= 1, got {a}")
    if b < a:
        raise InvalidRangeError(f"interval end {b} precedes start {a}")


def harmonic_sum(gamma: float, a: int, b: int) -> float:
    """Exact partial sum of 1/j^gamma for j = a..b, compensated summation."""
    _check_interval(a, b)
    return math.fsum(j ** (-gamma) for j in range(a, b + 1))


def harmonic_bounds(gamma: float, a: int, b: int) -> tuple[float, float]:
    """Integral sandwich around harmonic_sum(gamma, a, b) for gamma != 1.

    lower = (b^(1-gamma) - a^(1-gamma)) / (1 - gamma), upper = lower + a^-gamma.
    """
    _check_interval(a, b)
    if gamma == 1:
        raise UnsupportedExponentError(
            "gamma = 1 has logarithmic bounds; use head_mass_bounds_gamma1"
        )
    lower = (b ** (1.0 - gamma) - a ** (1.0 - gamma)) / (1.0 - gamma)
    return lower, lower + a ** (-gamma)


def head_mass(law: ZipfLaw, k: int) -> float:
    """Probability mass of the k most popular ranks, 0 <= k <= m."""
    if k < 0 or k > law.m:
        raise InvalidRangeError(f"k must lie in 0..{law.m}, got {k}")
    if k == 0:
        return 0.0
    return float(law.cdf[k - 1])


def head_mass_bound_sublinear(gamma_r: float, k: int, m: int) -> float:
    """Closed-form dominator 2 (k/m)^(1-gamma_r) of the top-k mass, 0 < gamma_r < 1."""
    if gamma_r >= 1:
        raise UnsupportedExponentError(f"requires gamma_r < 1, got {gamma_r}")
    if gamma_r <= 0:
        raise InvalidParameterError(f"requires gamma_r > 0, got {gamma_r}")
    if not 1 <= k <= m:
        raise InvalidRangeError(f"need 1 <= k <= m, got k={k}, m={m}")
    return 2.0 * (k / m) ** (1.0 - gamma_r)


def head_mass_bounds_gamma1(k: int, m: int) -> tuple[float, float]:
    """Logarithmic sandwich for partial Zipf(1) sums.

    upper bounds the mass of ranks 1..k from above; lower bounds the mass of
    ranks 2..k from below, clamped at 0 since it can go negative for small k.
    """
    if k < 2 or m < k:
        raise InvalidRangeError(f"need 2 <= k <= m, got k={k}, m={m}")
    upper = (math.log(k) + 1.0) / math.log(m)
    lower = max(0.0, (math.log(k) - 1.0) / (math.log(m) + 1.0))
    return lower, upper


def reuse_product_sum(gamma_r: float, gamma_c: float, m: int) -> float:
    """Sum of f_j * p_j over ranks j = 2..m for the two Zipf laws.

    For gamma_r, gamma_c > 1 this stays bounded away from 0 as m grows; it is
    the non-vanishing term behind linear link scaling under high content reuse.
    """
    if m < 2:
        raise InvalidRangeError(f"need m >= 2, got {m}")
    f = make_zipf(gamma_r, m).pmf
    p = make_zipf(gamma_c, m).pmf
    return float(np.dot(f[1:], p[1:]))
