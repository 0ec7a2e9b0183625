"""Node placement in the unit cell, range queries, and the virtual-cluster grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidParameterError

SQRT2 = math.sqrt(2.0)


class Placement:
    """Immutable positions of n nodes in the unit square, with a spatial index."""

    def __init__(self, positions: np.ndarray):
        positions = np.ascontiguousarray(positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 2 or positions.shape[0] < 1:
            raise InvalidParameterError("positions must be a non-empty (n, 2) array")
        if positions.min() < 0.0 or positions.max() > 1.0:
            raise InvalidParameterError("positions must lie in the unit square")
        positions.setflags(write=False)
        self.positions = positions
        self._tree = cKDTree(positions)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def neighbors(self, i: int, r: float) -> set[int]:
        """All nodes j != i with euclidean distance <= r from node i."""
        if not 0 <= i < self.n:
            raise IndexError(f"node id {i} not in 0..{self.n - 1}")
        _check_radius(r)
        hits = self._tree.query_ball_point(self.positions[i], r)
        return {int(j) for j in hits if j != i}

    def pairs_within(self, r: float) -> np.ndarray:
        """All unordered node pairs (i < j) with distance <= r, as an (m, 2) array."""
        _check_radius(r)
        return self._tree.query_pairs(r, output_type="ndarray")


def _check_radius(r: float) -> None:
    if not (0.0 < r <= SQRT2):
        raise InvalidParameterError(f"collaboration distance must be in (0, sqrt(2)], got {r}")


def place_nodes(n: int, rng: np.random.Generator) -> Placement:
    """Drop n i.i.d. uniform nodes in the unit square."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return Placement(rng.random((n, 2)))


@dataclass(frozen=True)
class ClusterGrid:
    """Square partition of the cell into g x g clusters of side s = 1/g.

    The side obeys s <= r/sqrt(2), so any two nodes sharing a cluster are
    within distance r of each other, and g^2 >= 2/r^2.
    """

    r: float
    g: int
    s: float

    @property
    def n_clusters(self) -> int:
        return self.g * self.g

    def cluster_of(self, positions: np.ndarray) -> np.ndarray:
        """Cluster id (row-major, id = iy*g + ix) per position.

        Cells are closed on their lower/left edges and open on the upper/right,
        except the last row/column, which is closed so the grid partitions the cell.
        """
        pts = np.atleast_2d(np.asarray(positions, dtype=np.float64))
        idx = np.minimum((pts * self.g).astype(np.int64), self.g - 1)
        return idx[:, 1] * self.g + idx[:, 0]

    def center(self, cluster_id: int) -> tuple[float, float]:
        iy, ix = divmod(int(cluster_id), self.g)
        return ((ix + 0.5) * self.s, (iy + 0.5) * self.s)


def build_cluster_grid(r: float) -> ClusterGrid:
    """Partition the cell into ceil(sqrt(2)/r)^2 clusters of diameter <= r."""
    _check_radius(r)
    g = math.ceil(SQRT2 / r)
    return ClusterGrid(r=float(r), g=g, s=1.0 / g)


@dataclass(frozen=True)
class ClusterState:
    """Occupancy of one cluster: member node ids (ascending) and their cached files.

    files is None while membership is computed before any cache assignment exists.
    """

    cluster_id: int
    members: np.ndarray
    files: np.ndarray | None

    @property
    def occupancy(self) -> int:
        return int(self.members.size)


def cluster_members(
    grid: ClusterGrid, placement: Placement, caches: np.ndarray | None = None
) -> list[ClusterState]:
    """Partition all nodes into per-cluster states; one entry per cluster, empties included."""
    if caches is not None:
        caches = np.asarray(caches)
        if caches.shape != (placement.n,):
            raise InvalidParameterError(
                f"caches must have length {placement.n}, got shape {caches.shape}"
            )
    ids = grid.cluster_of(placement.positions)
    order = np.argsort(ids, kind="stable")  # stable keeps node ids ascending per cluster
    sorted_ids = ids[order]
    boundaries = np.searchsorted(sorted_ids, np.arange(grid.n_clusters + 1))
    states = []
    for c in range(grid.n_clusters):
        members = order[boundaries[c] : boundaries[c + 1]]
        files = caches[members] if caches is not None else None
        states.append(ClusterState(cluster_id=c, members=members, files=files))
    return states


def max_square_members(
    grid: ClusterGrid, cluster_id: int, placement: Placement, r: float
) -> set[int]:
    """Nodes inside the axis-aligned square of side s + 2r centered on the cluster.

    This square covers every point reachable within r from anywhere in the
    cluster; its area never exceeds (1/sqrt(2) + 2)^2 * r^2.
    """
    if not 0 <= cluster_id < grid.n_clusters:
        raise IndexError(f"cluster id {cluster_id} not in 0..{grid.n_clusters - 1}")
    _check_radius(r)
    cx, cy = grid.center(cluster_id)
    half = grid.s / 2.0 + r
    pos = placement.positions
    inside = (np.abs(pos[:, 0] - cx) <= half) & (np.abs(pos[:, 1] - cy) <= half)
    return {int(i) for i in np.nonzero(inside)[0]}
