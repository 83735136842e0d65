import itertools

import networkx as nx
import numpy as np
import pytest
from conftest import random_graph

from rsbm.blocks import Partition, compute_block_stats
from rsbm.graph import from_edges, load_dataset, twin_stars
from rsbm.mcmc import MCMCConfig, run_trials
from rsbm.metrics import (LandscapeSample, coverage, distance_matrix, interpolate_partitions,
                          mds_project, modularity, partition_distance, sample_landscape)
from rsbm.models import Model


def test_coverage_twin_stars():
    g = twin_stars()
    assert coverage(compute_block_stats(g, Partition([0, 1] + [0] * 4 + [1] * 4, 2))) == \
        pytest.approx(8 / 9)
    assert coverage(compute_block_stats(g, Partition([0, 0] + [1] * 8, 2))) == pytest.approx(1 / 9)
    with pytest.raises(ValueError):
        coverage(compute_block_stats(from_edges([], 2), Partition([0, 1], 2)))


def test_modularity_matches_networkx(rng):
    for _ in range(10):
        g = random_graph(rng, 12, 25, loops=False).simple()
        if g.m == 0:
            continue
        p = Partition.random(12, 3, rng)
        G = nx.Graph()
        G.add_nodes_from(range(12))
        G.add_edges_from(g.edges.tolist())
        comms = [set(np.flatnonzero(p.assignment == r).tolist()) for r in range(3)]
        comms = [c for c in comms if c]
        assert modularity(compute_block_stats(g, p)) == pytest.approx(
            nx.community.modularity(G, comms), abs=1e-12)


def test_partition_distance_is_label_invariant():
    a = np.array([0, 0, 1, 1, 2])
    assert partition_distance(a, np.array([1, 1, 2, 2, 0])) == 0.0
    assert partition_distance(a, np.array([0, 0, 1, 2, 2])) == pytest.approx(0.2)
    assert partition_distance([], []) == 0.0
    with pytest.raises(ValueError):
        partition_distance([0], [0, 1])


def test_partition_distance_assignment_path_agrees(rng):
    for _ in range(20):
        a, b = rng.integers(4, size=15), rng.integers(4, size=15)
        assert partition_distance(a, b) == partition_distance(a, b, max_exact_blocks=1)


def test_distance_matrix_fast_path_agrees(rng):
    for B in (2, 3, 6):
        P = [rng.integers(B, size=10) for _ in range(12)]
        D = distance_matrix(P)
        E = np.array([[partition_distance(a, b) for b in P] for a in P])
        assert np.allclose(D, E) and np.allclose(D, D.T)


def test_interpolation_copies_parents():
    rng = np.random.default_rng(0)
    p, q = Partition([0] * 6, 2), Partition([1] * 6, 2)
    r = interpolate_partitions(p, q, rng)
    assert r.n_blocks == 2 and set(r.assignment.tolist()) <= {0, 1}
    rs = [interpolate_partitions(p, q, rng).assignment for _ in range(2000)]
    assert abs(np.mean(rs) - 0.5) < 0.02


def test_mds_recovers_planar_points(rng):
    X = rng.normal(size=(25, 2)) * [3.0, 1.0]
    D = np.linalg.norm(X[:, None] - X[None], axis=-1)
    Y = mds_project(D)
    assert np.allclose(np.linalg.norm(Y[:, None] - Y[None], axis=-1), D, atol=1e-6)
    assert np.allclose(Y.mean(axis=0), 0.0, atol=1e-10)
    for c in range(2):
        assert Y[np.argmax(np.abs(Y[:, c])), c] > 0
    with pytest.raises(ValueError):
        mds_project(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_mds_single_point():
    assert mds_project(np.zeros((1, 1))).shape == (1, 2)


def test_landscape_sample():
    g = load_dataset("karate")
    cfg = MCMCConfig(2, Model.dcsbm(), sweeps=20, seed=1)
    tr = run_trials(g, cfg, 3)
    land = sample_landscape(g, Model.dcsbm(), tr, max_points=100, seed=0)
    assert len(land.partitions) == 100 == len(land.objectives) == len(land.meta)
    assert land.coords2d.shape == (100, 2)
    keys = {p.assignment.tobytes() for p in land.partitions}
    assert len(keys) == 100
    assert all(t == -1 for t, s in land.meta[-10:])
    rows = land.rows()
    assert len(rows[0]) == 5
    small = sample_landscape(g, Model.dcsbm(), tr, max_points=5, seed=0)
    assert len(small.partitions) == 5 and all(t >= 0 for t, s in small.meta)
    again = sample_landscape(g, Model.dcsbm(), tr, max_points=100, seed=0)
    assert np.array_equal(again.coords2d, land.coords2d)
    with pytest.raises(ValueError):
        LandscapeSample([1], [])
    with pytest.raises(ValueError):
        LandscapeSample([], []).rows()
