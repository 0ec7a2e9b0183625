"""Cache-placement policies and the low-reuse caching-exponent solver."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    NoSolutionError,
    OutOfRegimeWarning,
    UnsupportedExponentError,
)
from .network import ClusterState
from .popularity import make_zipf

# Area factor of the largest square reachable from a cluster: (1/sqrt(2) + 2)^2.
ALPHA = (1.0 / math.sqrt(2.0) + 2.0) ** 2

EPSILON_MAX = 1.0 / 6.0


def assign_random_zipf(n: int, m: int, gamma_c: float, rng: np.random.Generator) -> np.ndarray:
    """Distributed policy: every node caches one file drawn i.i.d. Zipf(gamma_c, m)."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return make_zipf(gamma_c, m).sample_n(rng, n)


def assign_centralized_topk(clusters: Sequence[ClusterState], m: int) -> np.ndarray:
    """Centralized policy: a cluster with k members caches files 1..min(k, m).

    Members ordered by node id get files 1, 2, ...; when k > m the ranks wrap
    around cyclically, so duplicates appear only in overfull clusters.
    """
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    n = sum(st.occupancy for st in clusters)
    caches = np.zeros(n, dtype=np.int64)
    for st in clusters:
        if st.occupancy == 0:
            continue
        ranks = np.arange(st.occupancy, dtype=np.int64) % m + 1
        caches[np.sort(st.members)] = ranks
    if np.any(caches == 0):
        raise InvalidParameterError("clusters do not form a partition of 0..n-1")
    return caches


def eta(gamma_r: float) -> float:
    """Low-reuse scaling exponent (1 - gamma_r) / (2 - gamma_r) for 0 <= gamma_r < 1."""
    if gamma_r >= 1:
        raise UnsupportedExponentError(f"eta is defined for gamma_r < 1, got {gamma_r}")
    if gamma_r < 0:
        raise InvalidParameterError(f"gamma_r must be nonnegative, got {gamma_r}")
    return (1.0 - gamma_r) / (2.0 - gamma_r)


def solve_gamma_c(gamma_r: float, eta1: float) -> float:
    """Caching exponent gamma_c with (1-gamma_r)*gamma_c / (1-gamma_r+gamma_c) = eta1.

    Closed-form rearrangement, exact to 1e-12 when plugged back. A solution
    needs 0 < eta1 < 1 - gamma_r; outside that there is none. Values of
    eta1 - eta(gamma_r) outside (0, 1/6) are answered but flagged with
    OutOfRegimeWarning, since the scaling guarantee only covers that band.
    """
    if not 0.0 < gamma_r < 1.0:
        raise InvalidParameterError(f"gamma_r must be in (0, 1), got {gamma_r}")
    span = 1.0 - gamma_r
    if not 0.0 < eta1 < span:
        raise NoSolutionError(
            f"eta1 must lie in (0, {span}) for gamma_r={gamma_r}, got {eta1}"
        )
    gamma_c = eta1 * span / (span - eta1)
    eps = eta1 - eta(gamma_r)
    if not 0.0 < eps < EPSILON_MAX:
        warnings.warn(
            f"epsilon = eta1 - eta = {eps:.6g} outside (0, 1/6); "
            "returned gamma_c is outside the guaranteed regime",
            OutOfRegimeWarning,
            stacklevel=2,
        )
    return gamma_c


@dataclass(frozen=True)
class TheoryParams:
    """Derived parameters of the low-reuse achievability construction."""

    gamma_r: float
    epsilon: float
    eta: float
    eta1: float
    gamma_c: float
    eta2: float
    q: int
    alpha: float = ALPHA


def theory_params(gamma_r: float, epsilon: float, m: int) -> TheoryParams:
    """Populate the full low-reuse parameter record for a library of size m.

    q = ceil(m^(eta1/gamma_c)) is the rank below which cached files carry no
    value in the restricted accounting; eta2 governs the magnitude of f_q.
    """
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")
    base = eta(gamma_r)
    eta1 = base + epsilon
    gamma_c = solve_gamma_c(gamma_r, eta1)
    span = 1.0 - gamma_r
    eta2 = span * (1.0 + gamma_c) / (span + gamma_c)
    q = max(1, math.ceil(m ** (eta1 / gamma_c)))
    return TheoryParams(
        gamma_r=float(gamma_r),
        epsilon=float(epsilon),
        eta=base,
        eta1=eta1,
        gamma_c=gamma_c,
        eta2=eta2,
        q=q,
    )
