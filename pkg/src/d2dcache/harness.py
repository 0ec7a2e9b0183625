"""Deterministic Monte Carlo engine: trials, estimates, sweeps, and r-optimization.

Every trial is seeded from (base seed, trial index, config digest), so results
are bit-identical across runs and across any number of workers.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import repeat
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .caching import assign_centralized_topk, assign_random_zipf, eta
from .errors import InvalidParameterError, InvariantError
from .network import (
    SQRT2,
    build_cluster_grid,
    cluster_members,
    place_nodes,
)
from .popularity import make_zipf
from .scheduling import (
    EXACT_CUTOFF_DEFAULT,
    blocking_floor,
    build_conflict_graph,
    cluster_schedule,
    exact_mis,
    good_clusters,
    greedy_mis,
)
from .theory import Regime, classify, predicted_r_opt
from .traffic import potential_links, sample_requests, self_served

WORKERS_ENV = "D2DSIM_WORKERS"

POLICY_ZIPF = "zipf"
POLICY_TOPK = "topk"
M_SCHEDULE_LOG = "3lnn"
R_AUTO = "auto"

METRICS = ("potential", "self_served", "L_greedy", "L_exact", "L_cluster", "G")


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one experiment."""

    n: int
    gamma_r: float
    m: int | str = M_SCHEDULE_LOG
    policy: str = POLICY_ZIPF
    gamma_c: float | None = None
    r: float | str = R_AUTO
    r_constant: float = 1.5
    epsilon: float = 0.05
    seed: int = 0
    trials: int = 1
    exact_cutoff: int = EXACT_CUTOFF_DEFAULT

    def validate(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise InvalidParameterError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.m, int) and self.m != M_SCHEDULE_LOG:
            raise InvalidParameterError(
                f"m must be a positive integer or {M_SCHEDULE_LOG!r}, got {self.m!r}"
            )
        if isinstance(self.m, int) and self.m < 1:
            raise InvalidParameterError(f"m must be >= 1, got {self.m}")
        if self.policy not in (POLICY_ZIPF, POLICY_TOPK):
            raise InvalidParameterError(
                f"policy must be {POLICY_ZIPF!r} or {POLICY_TOPK!r}, got {self.policy!r}"
            )
        if self.policy == POLICY_ZIPF:
            if self.gamma_c is None or self.gamma_c < 0:
                raise InvalidParameterError(
                    f"gamma_c must be a nonnegative real for the zipf policy, got {self.gamma_c!r}"
                )
        if isinstance(self.r, str):
            if self.r != R_AUTO:
                raise InvalidParameterError(f"r must be a real or {R_AUTO!r}, got {self.r!r}")
        elif not 0.0 < self.r <= SQRT2:
            raise InvalidParameterError(f"r must lie in (0, sqrt(2)], got {self.r}")
        if self.r_constant <= 0:
            raise InvalidParameterError(f"r_constant must be positive, got {self.r_constant}")
        if self.gamma_r < 0:
            raise InvalidParameterError(f"gamma_r must be nonnegative, got {self.gamma_r}")
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be nonnegative, got {self.seed}")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be >= 1, got {self.trials}")
        if self.exact_cutoff < 0:
            raise InvalidParameterError(f"exact_cutoff must be >= 0, got {self.exact_cutoff}")

    def resolved_m(self) -> int:
        if isinstance(self.m, int):
            return self.m
        return max(8, math.ceil(3.0 * math.log(self.n)))

    def resolved_r(self) -> float:
        if not isinstance(self.r, str):
            return float(self.r)
        regime = classify(self.gamma_r)
        eta1 = None
        if regime is Regime.LOW_REUSE:
            eta1 = eta(self.gamma_r) + self.epsilon
        return predicted_r_opt(regime, self.n, self.resolved_m(), self.r_constant, eta1)

    def digest(self) -> str:
        payload = {
            "n": self.n,
            "m": self.resolved_m(),
            "gamma_r": self.gamma_r,
            "policy": self.policy,
            "gamma_c": self.gamma_c if self.policy == POLICY_ZIPF else None,
            "r": self.resolved_r(),
            "seed": self.seed,
            "trials": self.trials,
            "exact_cutoff": self.exact_cutoff,
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class TrialResult:
    """Counts observed in a single realization."""

    potential: int
    self_served: int
    l_greedy: int
    l_exact: int | None
    l_cluster: int
    good: int
    occupancy: dict[int, int]

    def metric(self, name: str) -> int | None:
        return {
            "potential": self.potential,
            "self_served": self.self_served,
            "L_greedy": self.l_greedy,
            "L_exact": self.l_exact,
            "L_cluster": self.l_cluster,
            "G": self.good,
        }[name]


def _trial_seed(cfg: SimConfig, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([cfg.seed, trial_index, int(cfg.digest(), 16)])


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvariantError(message)


def run_trial(cfg: SimConfig, trial_index: int) -> TrialResult:
    """Execute one seeded realization: place, cache, request, schedule, account."""
    cfg.validate()
    if trial_index < 0:
        raise InvalidParameterError(f"trial index must be >= 0, got {trial_index}")
    m = cfg.resolved_m()
    r = cfg.resolved_r()
    rng = np.random.default_rng(_trial_seed(cfg, trial_index))

    placement = place_nodes(cfg.n, rng)
    grid = build_cluster_grid(r)
    if cfg.policy == POLICY_ZIPF:
        caches = assign_random_zipf(cfg.n, m, cfg.gamma_c, rng)
    else:
        membership = cluster_members(grid, placement, None)
        caches = assign_centralized_topk(membership, m)
    clusters = cluster_members(grid, placement, caches)
    request_law = make_zipf(cfg.gamma_r, m)
    requests = sample_requests(cfg.n, request_law, rng)

    own = self_served(caches, requests)
    links = potential_links(placement, caches, requests, r)
    graph = build_conflict_graph(links, placement, r)
    greedy = greedy_mis(graph)
    l_exact = None
    if len(links) <= cfg.exact_cutoff:
        l_exact = len(exact_mis(graph, cfg.exact_cutoff))

    witnesses = good_clusters(clusters, requests)
    witness_links = list(witnesses.values())
    csched = cluster_schedule(witness_links, placement, r)
    n_good = len(witnesses)

    # per-trial invariants, always on
    pos = placement.positions
    if len(links):
        gap = np.linalg.norm(pos[links.tx] - pos[links.rx], axis=1)
        _require(bool((links.tx != links.rx).all()), "link with tx == rx")
        _require(bool((gap <= r).all()), "link longer than r")
        _require(bool((caches[links.tx] == links.file).all()), "tx does not cache the file")
        _require(bool((requests[links.rx] == links.file).all()), "rx does not request the file")
        _require(bool((caches[links.rx] != links.file).all()), "self-served node as receiver")
    by_pair = {(int(t), int(x)): i for i, (t, x) in enumerate(zip(links.tx, links.rx))}
    cluster_indices = []
    for k in csched.selected:
        rx_node, tx_node = witness_links[k]
        idx = by_pair.get((tx_node, rx_node))
        _require(idx is not None, "witness link missing from potential links")
        cluster_indices.append(idx)
    for sched_idx in (greedy.selected, tuple(cluster_indices)):
        if sched_idx:
            _require(graph.is_independent(sched_idx), "schedule not independent")
            ends = np.concatenate([links.tx[list(sched_idx)], links.rx[list(sched_idx)]])
            _require(np.unique(ends).size == 2 * len(sched_idx), "schedule not node-disjoint")
    _require(len(csched) >= blocking_floor(n_good), "cluster schedule below ceil(G/17)")
    if l_exact is not None:
        _require(l_exact >= len(greedy), "exact below greedy")
        _require(l_exact >= len(csched), "exact below cluster schedule")

    occ = np.bincount([st.occupancy for st in clusters])
    histogram = {int(k): int(v) for k, v in enumerate(occ) if v > 0}
    return TrialResult(
        potential=len(links),
        self_served=len(own),
        l_greedy=len(greedy),
        l_exact=l_exact,
        l_cluster=len(csched),
        good=n_good,
        occupancy=histogram,
    )


class MetricStats(NamedTuple):
    mean: float | None
    se: float | None
    count: int


@dataclass(frozen=True)
class SweepRow:
    """Aggregated estimates for one configuration."""

    digest: str
    n: int
    m: int
    gamma_r: float
    gamma_c: float | None
    policy: str
    r: float
    trials: int
    seed: int
    stats: dict[str, MetricStats]


def _aggregate(values: Sequence[float]) -> MetricStats:
    count = len(values)
    if count == 0:
        return MetricStats(None, None, 0)
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(count)) if count >= 2 else None
    return MetricStats(mean, se, count)


def _workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def run_trials(cfg: SimConfig) -> list[TrialResult]:
    """All trials of a config, in trial-index order, on 1..N workers."""
    cfg.validate()
    workers = _workers()
    indices = range(cfg.trials)
    if workers == 1 or cfg.trials == 1:
        return [run_trial(cfg, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, repeat(cfg), indices, chunksize=8))

def estimate(cfg: SimConfig, trials: int | None = None) -> SweepRow:
    """Sample mean and standard error of every trial metric."""
    if trials is not None:
        cfg = replace(cfg, trials=trials)
    cfg.validate()
    results = run_trials(cfg)
    stats: dict[str, MetricStats] = {}
    for name in METRICS:
        values = [tr.metric(name) for tr in results if tr.metric(name) is not None]
        stats[name] = _aggregate(values)
    return SweepRow(
        digest=cfg.digest(),
        n=cfg.n,
        m=cfg.resolved_m(),
        gamma_r=cfg.gamma_r,
        gamma_c=cfg.gamma_c if cfg.policy == POLICY_ZIPF else None,
        policy=cfg.policy,
        r=cfg.resolved_r(),
        trials=cfg.trials,
        seed=cfg.seed,
        stats=stats,
    )


def sweep(
    grid: Sequence[SimConfig], existing: Mapping[str, SweepRow] | None = None
) -> list[SweepRow]:
    """One row per config in grid order; rows already in `existing` are reused."""
    if not grid:
        raise InvalidParameterError("sweep grid is empty")
    digests = [cfg.digest() for cfg in grid]
    if len(set(digests)) != len(digests):
        raise InvalidParameterError("sweep grid contains duplicate configurations")
    existing = existing or {}
    rows = []
    for cfg, dg in zip(grid, digests):
        rows.append(existing[dg] if dg in existing else estimate(cfg))
    return rows


class FitResult(NamedTuple):
    slope: float
    intercept: float
    stderr: float


def fit_powerlaw(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Ordinary least squares on (ln x, ln y); stderr is the slope's standard error."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 3:
        raise InvalidParameterError("need at least 3 paired observations")
    if (x <= 0).any() or (y <= 0).any():
        raise InvalidParameterError("power-law fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise InvalidParameterError("all x values coincide; slope undefined")
    slope = float(np.dot(dx, ly - ly.mean()) / sxx)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    sigma2 = float(np.dot(resid, resid)) / (x.size - 2)
    return FitResult(slope, intercept, math.sqrt(max(sigma2, 0.0) / sxx))


_ROW_FIELDS = ("n", "m", "gamma_r", "gamma_c", "r", "trials", "seed")


def row_value(row: SweepRow, field: str) -> float:
    """Numeric accessor over config fields, '<metric>_mean' and '<metric>_se'."""
    if field in _ROW_FIELDS:
        value = getattr(row, field)
    elif field.endswith("_mean") and field[:-5] in METRICS:
        value = row.stats[field[:-5]].mean
    elif field.endswith("_se") and field[:-3] in METRICS:
        value = row.stats[field[:-3]].se
    else:
        raise InvalidParameterError(f"unknown field {field!r}")
    if value is None:
        raise InvalidParameterError(f"field {field!r} has no value in row {row.digest}")
    return float(value)


def fit_exponent(rows: Sequence[SweepRow], x: str, y: str) -> FitResult:
    """Log-log slope of column y against column x across sweep rows."""
    xs = [row_value(row, x) for row in rows]
    ys = [row_value(row, y) for row in rows]
    return fit_powerlaw(xs, ys)


@dataclass(frozen=True)
class OptimizeResult:
    r_star: float
    rows: list[SweepRow]
    boundary: bool
    grid: tuple[float, ...]


def optimize_r(
    cfg: SimConfig,
    window: tuple[float, float],
    points: int,
    trials_per_point: int,
) -> OptimizeResult:
    """Profile mean L_greedy over a geometric r grid and return the argmax.

    Ties resolve toward smaller r. The boundary flag marks an argmax sitting on
    either window edge, where the true optimum may lie outside the window.
    """
    r_lo, r_hi = window
    if not 0.0 < r_lo <= r_hi <= SQRT2:
        raise InvalidParameterError(f"window must satisfy 0 < lo <= hi <= sqrt(2), got {window}")
    if points < 3:
        raise InvalidParameterError(f"need at least 3 grid points, got {points}")
    values = np.geomspace(r_lo, r_hi, points)
    grid_r = []
    for v in values:
        fv = float(min(v, SQRT2))
        if not grid_r or fv > grid_r[-1]:
            grid_r.append(fv)
    rows = [estimate(replace(cfg, r=rv, trials=trials_per_point)) for rv in grid_r]
    means = [row.stats["L_greedy"].mean for row in rows]
    best = int(np.argmax(means))
    boundary = best in (0, len(grid_r) - 1)
    return OptimizeResult(
        r_star=grid_r[best], rows=rows, boundary=boundary, grid=tuple(grid_r)
    )
