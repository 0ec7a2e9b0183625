import math

import numpy as np
import pytest
from hypothesis import settings

# property tests replay the same example sequence on every run
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def three_sigma_binomial(p: float, n: int) -> float:
    """3-sigma . band for an empirical frequency of a Bernoulli(p) over n draws."""
    return 3.0 * math.sqrt(max(p * (1.0 - p), 1e-12) / n)


def brute_force_links(positions, caches, requests, r):
    """Quadratic-loop oracle for potential-link enumeration."""
    n = len(positions)
    out = []
    for rx in range(n):
        if caches[rx] == requests[rx]:
            continue
        for tx in range(n):
            if tx == rx:
                continue
            d = math.dist(positions[tx], positions[rx])
            if d <= r and caches[tx] == requests[rx]:
                out.append((tx, rx, requests[rx]))
    return sorted(out, key=lambda t: (t[1], t[0]))


def brute_force_mis_size(graph) -> int:
    """Exhaustive subset enumeration oracle for maximum independent set size."""
    nv = graph.n_vertices
    if nv == 0:
        return 0
    assert nv <= 20, "oracle limited to 20 vertices"
    adj = np.zeros(nv, dtype=np.int64)
    for v in range(nv):
        for u in graph.neighbors(v):
            adj[v] |= 1 << int(u)
    masks = np.arange(1 << nv, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for v in range(nv):
        sel = (masks >> v) & 1 == 1
        ok &= ~(sel & ((masks & adj[v]) != 0))
    sizes = np.zeros(masks.size, dtype=np.int16)
    for v in range(nv):
        sizes += ((masks >> v) & 1).astype(np.int16)
    return int(sizes[ok].max())
