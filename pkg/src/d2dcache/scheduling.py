"""Protocol-model conflict graphs and link schedulers.

Three schedulers are provided: an exact branch-and-bound maximum independent
set for small instances, a scalable min-degree greedy, and a cluster-based
scheduler whose output is always at least ceil(G/17) links for G good clusters.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import GraphTooLargeError, InvalidParameterError
from .network import ClusterState, Placement
from .popularity import ZipfLaw
from .traffic import LinkSet

# One active cluster can disable at most 16 neighbors under the protocol model.
BLOCKING_LIMIT = 16

EXACT_CUTOFF_DEFAULT = 40


class ConflictGraph:
    """Symmetric interference relation over potential links, CSR adjacency."""

    def __init__(self, n_vertices: int, indptr: np.ndarray, indices: np.ndarray):
        self.n_vertices = int(n_vertices)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Sequence[tuple[int, int]]) -> "ConflictGraph":
        adj: list[set[int]] = [set() for _ in range(n_vertices)]
        for a, b in edges:
            if a == b:
                raise InvalidParameterError("self-edges are not allowed")
            adj[a].add(b)
            adj[b].add(a)
        indptr = np.zeros(n_vertices + 1, dtype=np.int64)
        chunks = []
        for v in range(n_vertices):
            nbrs = np.fromiter(sorted(adj[v]), dtype=np.int64, count=len(adj[v]))
            chunks.append(nbrs)
            indptr[v + 1] = indptr[v] + nbrs.size
        indices = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
        return cls(n_vertices, indptr, indices)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return int(self.indices.size // 2)

    def is_independent(self, vertices: Sequence[int]) -> bool:
        verts = np.asarray(sorted(vertices), dtype=np.int64)
        if verts.size <= 1:
            return True
        for v in verts:
            if np.isin(self.neighbors(int(v)), verts, assume_unique=False).any():
                return False
        return True


@dataclass(frozen=True)
class Schedule:
    """An independent set of link indices plus the scheduler that produced it."""

    selected: tuple[int, ...]
    tag: str

    def __len__(self) -> int:
        return len(self.selected)


def build_conflict_graph(links: LinkSet, placement: Placement, r: float) -> ConflictGraph:
    """Edge between links a, b iff they share a node or a transmitter sits
    within r of the other link's receiver (either orientation).

    Shared-node conflicts are subsumed by the distance conditions: any shared
    endpoint puts one link's transmitter within r of the other's receiver.
    """
    n = len(links)
    if n == 0:
        return ConflictGraph(0, np.zeros(1, dtype=np.int64), np.empty(0, dtype=np.int64))
    pos_tx = placement.positions[links.tx]
    pos_rx = placement.positions[links.rx]
    tree_tx = cKDTree(pos_tx)
    tree_rx = cKDTree(pos_rx)
    # entry (a, b): tx of link b within r of rx of link a
    near = tree_rx.sparse_distance_matrix(tree_tx, r, output_type="coo_matrix")
    near.data[:] = 1.0
    sym = (near + near.T).tocsr()
    sym.setdiag(0.0)  # every diagonal entry exists: a link's own tx-rx gap is <= r
    sym.eliminate_zeros()
    sym.sort_indices()
    return ConflictGraph(n, sym.indptr.astype(np.int64), sym.indices.astype(np.int64))


def greedy_mis(graph: ConflictGraph) -> Schedule:
    """Min-degree greedy independent set; ties broken toward lower index."""
    n = graph.n_vertices
    if n == 0:
        return Schedule((), "greedy")
    deg = graph.degrees().astype(np.int64)
    alive = np.ones(n, dtype=bool)
    heap: list[tuple[int, int]] = [(int(deg[v]), v) for v in range(n)]
    # already sorted by vertex for equal degrees; heapify keeps the invariant
    heapq.heapify(heap)
    selected: list[int] = []
    remaining = n
    while remaining > 0:
        d, v = heapq.heappop(heap)
        if not alive[v] or deg[v] != d:
            continue
        selected.append(v)
        nbrs = graph.neighbors(v)
        kill = nbrs[alive[nbrs]]
        alive[v] = False
        alive[kill] = False
        remaining -= 1 + kill.size
        if kill.size:
            affected = np.concatenate([graph.neighbors(int(u)) for u in kill])
            affected = affected[alive[affected]]
            if affected.size:
                uniq, counts = np.unique(affected, return_counts=True)
                deg[uniq] -= counts
                for u, du in zip(uniq.tolist(), deg[uniq].tolist()):
                    heapq.heappush(heap, (du, u))
    return Schedule(tuple(sorted(selected)), "greedy")


def exact_mis(graph: ConflictGraph, cutoff: int = EXACT_CUTOFF_DEFAULT) -> Schedule:
    """Maximum independent set by branch and bound on bitmasks.

    Branches on the lowest-index candidate, include-first, so the first
    optimum found (and kept) is the lexicographically smallest one. Prunes on
    candidate count and on a degree-based bound: excluded vertices must cover
    all remaining edges, each covering at most Delta of them.
    """
    n = graph.n_vertices
    if n > cutoff:
        raise GraphTooLargeError(f"{n} vertices exceeds exact-solver cutoff {cutoff}")
    if n == 0:
        return Schedule((), "exact")
    adj = [0] * n
    for v in range(n):
        mask = 0
        for u in graph.neighbors(v):
            mask |= 1 << int(u)
        adj[v] = mask

    best_size = len(greedy_mis(graph)) - 1  # strict-improvement threshold
    best_mask = 0

    def descend(cur: int, cand: int, size: int) -> None:
        nonlocal best_size, best_mask
        if cand == 0:
            if size > best_size:
                best_size = size
                best_mask = cur
            return
        rem = cand.bit_count()
        if size + rem <= best_size:
            return
        # degree-based refinement on the candidate subgraph
        edges2 = 0
        max_deg = 0
        c = cand
        while c:
            v = (c & -c).bit_length() - 1
            c &= c - 1
            dv = (adj[v] & cand).bit_count()
            edges2 += dv
            if dv > max_deg:
                max_deg = dv
        if max_deg == 0:
            if size + rem > best_size:
                best_size = size + rem
                best_mask = cur | cand
            return
        covered = -((edges2 // 2) // -max_deg)  # ceil division
        if size + rem - covered <= best_size:
            return
        v = (cand & -cand).bit_length() - 1
        bit = 1 << v
        descend(cur | bit, cand & ~(adj[v] | bit), size + 1)
        descend(cur, cand & ~bit, size)

    descend(0, (1 << n) - 1, 0)
    selected = tuple(v for v in range(n) if best_mask >> v & 1)
    return Schedule(selected, "exact")


def cluster_value(files: Sequence[int], law: ZipfLaw, q: int = 1) -> float:
    """Total request mass of the distinct cached files of rank >= q.

    q = 1 counts every distinct cached file; larger q implements the
    restricted accounting where low ranks carry no value.
    """
    arr = np.asarray(files, dtype=np.int64)
    if arr.size == 0:
        return 0.0
    if arr.min() < 1 or arr.max() > law.m:
        raise InvalidParameterError(f"file ids must lie in 1..{law.m}")
    distinct = np.unique(arr[arr >= q])
    if distinct.size == 0:
        return 0.0
    return float(law.pmf[distinct - 1].sum())


def good_clusters(
    clusters: Sequence[ClusterState], requests: np.ndarray, q: int = 1
) -> dict[int, tuple[int, int]]:
    """Clusters holding at least one serviceable intra-cluster request.

    A cluster is good iff some member rx requests a file of rank >= q that a
    different member tx caches, and rx does not cache it itself. Returns the
    lexicographically smallest witness (rx, tx) per good cluster, keyed by
    cluster id in ascending order.
    """
    requests = np.asarray(requests)
    witnesses: dict[int, tuple[int, int]] = {}
    for st in clusters:
        if st.occupancy < 2:
            continue
        if st.files is None:
            raise InvalidParameterError("cluster states carry no cache assignment")
        members = st.members
        files = st.files
        reqs = requests[members]
        found = None
        for local in np.argsort(members, kind="stable"):
            rx = int(members[local])
            want = int(reqs[local])
            if want < q or int(files[local]) == want:
                continue
            hits = members[(files == want) & (members != rx)]
            if hits.size:
                found = (rx, int(hits.min()))
                break
        if found is not None:
            witnesses[st.cluster_id] = found
    return dict(sorted(witnesses.items()))


def cluster_schedule(
    witness_links: Sequence[tuple[int, int]], placement: Placement, r: float
) -> Schedule:
    """Greedy conflict-free selection over good-cluster witnesses in given order.

    Witnesses arrive in row-major cluster order; each is kept unless it
    conflicts with an already-selected witness. Since a selection can block at
    most 16 other good clusters, the result always has >= ceil(G/17) links.
    """
    selected: list[int] = []
    if not witness_links:
        return Schedule((), "cluster")
    pos = placement.positions
    rx = np.fromiter((w[0] for w in witness_links), dtype=np.int64, count=len(witness_links))
    tx = np.fromiter((w[1] for w in witness_links), dtype=np.int64, count=len(witness_links))
    sel_tx = np.empty((0, 2))
    sel_rx = np.empty((0, 2))
    for k in range(len(witness_links)):
        p_tx, p_rx = pos[tx[k]], pos[rx[k]]
        if selected:
            clash = (
                (np.linalg.norm(sel_rx - p_tx, axis=1) <= r).any()
                or (np.linalg.norm(sel_tx - p_rx, axis=1) <= r).any()
            )
            if clash:
                continue
        selected.append(k)
        sel_tx = np.vstack([sel_tx, p_tx])
        sel_rx = np.vstack([sel_rx, p_rx])
    return Schedule(tuple(selected), "cluster")


def blocking_floor(n_good: int) -> int:
    """Guaranteed schedule size for n_good good clusters: ceil(n_good / 17)."""
    return -(n_good // -(BLOCKING_LIMIT + 1))
