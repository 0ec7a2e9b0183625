import math

import numpy as np
import pytest

from d2dcache.caching import ALPHA
from d2dcache.errors import InvalidParameterError
from d2dcache.network import (
    Placement,
    build_cluster_grid,
    cluster_members,
    max_square_members,
    place_nodes,
)


class TestPlaceNodes:
    def test_single_node_in_unit_square(self, rng):
        p = place_nodes(1, rng)
        assert p.n == 1
        assert 0.0 <= p.positions[0, 0] <= 1.0
        assert 0.0 <= p.positions[0, 1] <= 1.0

    def test_rejects_zero(self, rng):
        with pytest.raises(InvalidParameterError):
            place_nodes(0, rng)

    def test_bit_identical_for_same_seed(self):
        a = place_nodes(500, np.random.default_rng(42))
        b = place_nodes(500, np.random.default_rng(42))
        assert (a.positions == b.positions).all()

    def test_uniform_moments(self):
        n = 10**5
        p = place_nodes(n, np.random.default_rng(7))
        sigma = 1.0 / math.sqrt(12 * n)
        assert abs(p.positions[:, 0].mean() - 0.5) < 3 * sigma
        assert abs(p.positions[:, 1].mean() - 0.5) < 3 * sigma

    def test_positions_read_only(self, rng):
        p = place_nodes(5, rng)
        with pytest.raises(ValueError):
            p.positions[0, 0] = 0.5


class TestNeighbors:
    def test_single_node_empty(self, rng):
        p = place_nodes(1, rng)
        assert p.neighbors(0, 0.3) == set()

    def test_two_close_nodes_mutual(self):
        p = Placement(np.array([[0.1, 0.1], [0.1, 0.18]]))
        assert p.neighbors(0, 0.1) == {1}
        assert p.neighbors(1, 0.1) == {0}

    def test_invalid_node_id(self, rng):
        p = place_nodes(3, rng)
        with pytest.raises(IndexError):
            p.neighbors(3, 0.1)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for trial in range(200):
            n = int(rng.integers(2, 40))
            r = float(rng.uniform(0.05, 0.8))
            p = place_nodes(n, rng)
            i = int(rng.integers(0, n))
            expected = {
                j
                for j in range(n)
                if j != i and math.dist(p.positions[i], p.positions[j]) <= r
            }
            assert p.neighbors(i, r) == expected

    def test_symmetry(self):
        rng = np.random.default_rng(3)
        p = place_nodes(60, rng)
        for i in range(p.n):
            for j in p.neighbors(i, 0.2):
                assert i in p.neighbors(j, 0.2)


class TestClusterGrid:
    def test_full_cell_single_cluster(self):
        grid = build_cluster_grid(math.sqrt(2))
        assert grid.g == 1
        assert grid.n_clusters == 1

    def test_r_point_two(self):
        grid = build_cluster_grid(0.2)
        assert grid.g == 8
        assert grid.n_clusters == 64
        assert grid.s == pytest.approx(0.125)
        assert grid.s <= 0.2 / math.sqrt(2) + 1e-15

    @pytest.mark.parametrize("r", [0.03, 0.077, 0.1, 0.25, 0.5, 1.0, math.sqrt(2)])
    def test_invariants(self, r):
        grid = build_cluster_grid(r)
        assert grid.s * math.sqrt(2) <= r + 1e-12  # cluster diameter fits in r
        assert grid.g**2 >= 2.0 / r**2 - 1e-9

    def test_rejects_bad_radius(self):
        with pytest.raises(InvalidParameterError):
            build_cluster_grid(0.0)
        with pytest.raises(InvalidParameterError):
            build_cluster_grid(1.5)


class TestClusterMembers:
    def test_single_node(self, rng):
        p = place_nodes(1, rng)
        grid = build_cluster_grid(0.5)
        states = cluster_members(grid, p, np.array([1]))
        occupied = [st for st in states if st.occupancy > 0]
        assert len(states) == grid.n_clusters
        assert len(occupied) == 1
        assert occupied[0].occupancy == 1

    def test_partition_property(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 200))
            p = place_nodes(n, rng)
            grid = build_cluster_grid(float(rng.uniform(0.05, 1.0)))
            states = cluster_members(grid, p, np.ones(n, dtype=np.int64))
            assert sum(st.occupancy for st in states) == n
            all_members = np.concatenate([st.members for st in states])
            assert np.array_equal(np.sort(all_members), np.arange(n))

    def test_intra_cluster_reachability(self):
        rng = np.random.default_rng(17)
        p = place_nodes(300, rng)
        r = 0.21
        grid = build_cluster_grid(r)
        for st in cluster_members(grid, p, np.ones(300, dtype=np.int64)):
            pos = p.positions[st.members]
            for a in range(st.occupancy):
                for b in range(a + 1, st.occupancy):
                    assert math.dist(pos[a], pos[b]) <= r

    def test_mean_occupancy_matches_binomial(self):
        n, trials = 64, 10**4
        grid = build_cluster_grid(0.4)
        total = 0
        rng = np.random.default_rng(23)
        for _ in range(trials):
            ids = grid.cluster_of(rng.random((n, 2)))
            total += int((ids == 0).sum())
        p_cell = grid.s**2
        mean = total / trials
        sigma = math.sqrt(n * p_cell * (1 - p_cell) / trials)
        assert abs(mean - n * p_cell) < 3 * sigma

    def test_size_mismatch_rejected(self, rng):
        p = place_nodes(4, rng)
        with pytest.raises(InvalidParameterError):
            cluster_members(build_cluster_grid(0.5), p, np.array([1, 2]))


class TestMaxSquareMembers:
    def test_single_node_returned(self):
        p = Placement(np.array([[0.51, 0.52]]))
        grid = build_cluster_grid(0.5)
        cid = int(grid.cluster_of(p.positions)[0])
        assert max_square_members(grid, cid, p, 0.5) == {0}

    def test_superset_of_cluster(self):
        rng = np.random.default_rng(31)
        p = place_nodes(250, rng)
        r = 0.15
        grid = build_cluster_grid(r)
        states = cluster_members(grid, p, np.ones(250, dtype=np.int64))
        for st in states:
            if st.occupancy == 0:
                continue
            box = max_square_members(grid, st.cluster_id, p, r)
            assert set(st.members.tolist()) <= box

    @pytest.mark.parametrize("r", [0.05, 0.1, 0.2])
    def test_query_square_area_bounded(self, r):
        grid = build_cluster_grid(r)
        side = grid.s + 2 * r
        assert side**2 <= ALPHA * r**2 + 1e-12

    def test_invalid_cluster(self, rng):
        p = place_nodes(3, rng)
        grid = build_cluster_grid(0.5)
        with pytest.raises(IndexError):
            max_square_members(grid, grid.n_clusters, p, 0.5)
