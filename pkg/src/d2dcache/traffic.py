"""Request generation, self-request handling, and potential-link enumeration."""

from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np

from .errors import InvalidParameterError
from .network import Placement
from .popularity import ZipfLaw


class PotentialLink(NamedTuple):
    """A feasible D2D transmission: tx caches `file`, rx requests it, distance <= r."""

    tx: int
    rx: int
    file: int


class LinkSet:
    """Column-wise store of potential links; indexable as PotentialLink records."""

    def __init__(self, tx: np.ndarray, rx: np.ndarray, file: np.ndarray):
        self.tx = np.asarray(tx, dtype=np.int64)
        self.rx = np.asarray(rx, dtype=np.int64)
        self.file = np.asarray(file, dtype=np.int64)

    def __len__(self) -> int:
        return self.tx.size

    def __getitem__(self, i: int) -> PotentialLink:
        return PotentialLink(int(self.tx[i]), int(self.rx[i]), int(self.file[i]))

    def __iter__(self) -> Iterator[PotentialLink]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def empty(cls) -> "LinkSet":
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, z)


def sample_requests(n: int, law: ZipfLaw, rng: np.random.Generator) -> np.ndarray:
    """One i.i.d. request per node, drawn from the popularity law."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return law.sample_n(rng, n)


def self_served(caches: np.ndarray, requests: np.ndarray) -> set[int]:
    """Nodes whose own cache already holds their request; never D2D receivers."""
    caches = np.asarray(caches)
    requests = np.asarray(requests)
    if caches.shape != requests.shape:
        raise InvalidParameterError(
            f"caches and requests must match in length, got {caches.shape} vs {requests.shape}"
        )
    return {int(i) for i in np.nonzero(caches == requests)[0]}


def potential_links(
    placement: Placement, caches: np.ndarray, requests: np.ndarray, r: float
) -> LinkSet:
    """Every (tx, rx, file) with distance <= r, cache[tx] = request[rx] != cache[rx].

    All candidate transmitters per receiver are kept; the schedulers choose
    among alternatives. Self-served receivers contribute no links, but a
    self-served node may still appear as a transmitter. Links are sorted by
    (rx, tx) so indices are deterministic.
    """
    caches = np.asarray(caches)
    requests = np.asarray(requests)
    if caches.shape != (placement.n,) or requests.shape != (placement.n,):
        raise InvalidParameterError("caches and requests must have one entry per node")
    pairs = placement.pairs_within(r)
    if pairs.size == 0:
        return LinkSet.empty()
    i, j = pairs[:, 0], pairs[:, 1]
    not_self_i = caches[i] != requests[i]
    not_self_j = caches[j] != requests[j]
    j_serves_i = (caches[j] == requests[i]) & not_self_i
    i_serves_j = (caches[i] == requests[j]) & not_self_j
    tx = np.concatenate([j[j_serves_i], i[i_serves_j]])
    rx = np.concatenate([i[j_serves_i], j[i_serves_j]])
    order = np.lexsort((tx, rx))
    tx, rx = tx[order], rx[order]
    return LinkSet(tx, rx, requests[rx])
