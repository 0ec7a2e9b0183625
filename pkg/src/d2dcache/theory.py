"""Computable forms of the scaling predictions and concentration bounds.

Every prediction is exposed up to a single multiplicative constant; the
research results behind them are order-of-growth statements, so the harness
fits constants rather than asserting absolute values.
"""

from __future__ import annotations

import math
import warnings
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    InvalidRangeError,
    OutOfRegimeWarning,
    OutOfValidityError,
)
from .network import SQRT2
from .popularity import ZipfLaw, head_mass
from .scheduling import cluster_value

# below this library size the critical-regime forms lose their meaning (m <= e^e)
CRITICAL_M_FLAG = math.exp(math.e)
LOGLOG_FLOOR = 0.1


class Regime(Enum):
    """Content-reuse regime, classified by the request exponent."""

    HIGH_REUSE = "high"
    LOW_REUSE = "low"
    CRITICAL = "critical"


def classify(gamma_r: float) -> Regime:
    if gamma_r > 1.0:
        return Regime.HIGH_REUSE
    if gamma_r < 1.0:
        return Regime.LOW_REUSE
    return Regime.CRITICAL


def _check_nm(n: int, m: int) -> None:
    if n < 2:
        raise InvalidParameterError(f"n must be >= 2, got {n}")
    if m < 3:
        raise InvalidParameterError(f"m must be >= 3, got {m}")


def _loglog(m: int) -> float:
    llm = math.log(math.log(m))
    if m <= CRITICAL_M_FLAG:
        warnings.warn(
            f"m={m} is too small for the critical-regime form (loglog m <= 1); "
            f"flooring loglog at {LOGLOG_FLOOR}",
            OutOfRegimeWarning,
            stacklevel=3,
        )
    return max(llm, LOGLOG_FLOOR)


def predicted_r_opt(
    regime: Regime, n: int, m: int, c: float = 1.0, eta1: float | None = None
) -> float:
    """Optimal collaboration distance for the regime, up to the constant c.

    high reuse: c*sqrt(1/n); low reuse: c*sqrt(m^eta1/n); critical:
    c*sqrt(log m / (n loglog m)). Clamped into (0, sqrt(2)].
    """
    _check_nm(n, m)
    if c <= 0:
        raise InvalidParameterError(f"constant must be positive, got {c}")
    if regime is Regime.HIGH_REUSE:
        value = c * math.sqrt(1.0 / n)
    elif regime is Regime.LOW_REUSE:
        if eta1 is None:
            raise InvalidParameterError("low-reuse prediction needs eta1")
        value = c * math.sqrt(m**eta1 / n)
    else:
        value = c * math.sqrt(math.log(m) / (n * _loglog(m)))
    return min(value, SQRT2)


def predicted_el(regime: Regime, n: int, m: int, eta1: float | None = None) -> float:
    """Expected active-link count for the regime, up to a constant.

    high reuse: n; low reuse: n/m^eta1; critical: n*loglog m / log m.
    """
    _check_nm(n, m)
    if regime is Regime.HIGH_REUSE:
        return float(n)
    if regime is Regime.LOW_REUSE:
        if eta1 is None:
            raise InvalidParameterError("low-reuse prediction needs eta1")
        return n / m**eta1
    return n * _loglog(m) / math.log(m)


def goodness_upper_bound(k: int, law: ZipfLaw) -> float:
    """Policy-free cap on Pr[cluster good | k users]: 1 - (1 - top-k mass)^k."""
    if k < 0:
        raise InvalidParameterError(f"k must be nonnegative, got {k}")
    mass = head_mass(law, min(k, law.m))
    return min(1.0, max(0.0, 1.0 - (1.0 - mass) ** k))


def goodness_lower_bound(
    files: Sequence[int],
    law: ZipfLaw,
    q: int = 1,
    exclusion: str = "max-cached",
) -> float:
    """Lower bound on Pr[cluster good | caches] with self-requests excluded.

    1 - (1 - max(0, v - d))^k with v the cluster value of ranks >= q and d the
    self-request deduction: the largest popularity among cached ranks >= q
    (exclusion="max-cached"), or f_q itself (exclusion="rank-q", the variant
    used when at least one member is known to cache rank q).
    """
    arr = np.asarray(files, dtype=np.int64)
    k = arr.size
    if k < 1:
        raise InvalidParameterError("need at least one cached file")
    v = cluster_value(arr, law, q)
    if exclusion == "max-cached":
        eligible = arr[arr >= q]
        d = float(law.pmf[eligible - 1].max()) if eligible.size else 0.0
    elif exclusion == "rank-q":
        if not 1 <= q <= law.m:
            raise InvalidRangeError(f"q must lie in 1..{law.m}, got {q}")
        d = float(law.pmf[q - 1])
    else:
        raise InvalidParameterError(f"unknown exclusion mode {exclusion!r}")
    return min(1.0, max(0.0, 1.0 - (1.0 - max(0.0, v - d)) ** k))


def chernoff_binomial_tail(n: int, p: float, big_r: float) -> float:
    """Chernoff tail Pr[Binomial(n, p) >= R] <= 2^-R, valid only for R >= 6np."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"need n >= 0 and p in [0, 1], got n={n}, p={p}")
    if big_r < 6.0 * n * p:
        raise OutOfValidityError(
            f"R={big_r} below validity threshold 6np={6.0 * n * p}"
        )
    try:
        bound = 2.0 ** (-big_r)
    except OverflowError:
        bound = 0.0
    return min(1.0, max(0.0, bound))


def azuma_value_tail(k: int, h: int, f_q: float, t: float) -> float:
    """Concentration tail for the restricted cluster value with k - h free caches.

    Each free cache moves the value by at most f_q, giving
    Pr[|v - E v| >= t] <= 2 exp(-2 t^2 / ((k - h) f_q^2)). With k = h the value
    is deterministic and the tail is 0.
    """
    if not 0 <= h <= k:
        raise InvalidParameterError(f"need 0 <= h <= k, got h={h}, k={k}")
    if not 0.0 < f_q <= 1.0:
        raise InvalidParameterError(f"f_q must be in (0, 1], got {f_q}")
    if t <= 0:
        raise InvalidParameterError(f"t must be positive, got {t}")
    if k == h:
        return 0.0
    return min(1.0, 2.0 * math.exp(-2.0 * t * t / ((k - h) * f_q * f_q)))


def conditional_value_mean(
    k: int, h: int, law_r: ZipfLaw, law_c: ZipfLaw, q: int
) -> float:
    """Mean restricted cluster value given h members cache rank q and k - h
    members cache i.i.d. draws from the caching law:
    f_q + sum_{j>q} f_j (1 - (1 - p_j)^(k-h)).
    """
    if not 0 <= h <= k:
        raise InvalidParameterError(f"need 0 <= h <= k, got h={h}, k={k}")
    if law_r.m != law_c.m:
        raise InvalidParameterError("request and caching laws must share one library")
    m = law_r.m
    if not 1 <= q <= m:
        raise InvalidRangeError(f"q must lie in 1..{m}, got {q}")
    f = law_r.pmf
    total = float(f[q - 1])
    if q < m:
        p_tail = law_c.pmf[q:]
        total += float(np.dot(f[q:], 1.0 - (1.0 - p_tail) ** (k - h)))
    return total
