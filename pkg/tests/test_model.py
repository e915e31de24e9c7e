"""Datasets, partitions, signals, metrics, and the recovery bound."""

import math

import numpy as np
import pytest

from conftest import random_graph
from nlasso import (
    DatasetFormatError,
    NetworkDataset,
    NoiseSpec,
    Partition,
    boundary_edges,
    from_edge_list,
    generate_labels,
    load_dataset_csv,
    load_network_dataset,
    load_partition_csv,
    nmse,
    partition_from_clusters,
    piecewise_signal,
    predict,
    theorem2_bound,
    total_variation,
    training_error,
    tv_on_edge_subset,
    write_dataset_csv,
    write_partition_csv,
)


def _toy_dataset():
    g = from_edge_list([(0, 1, 1.0), (1, 2, 2.0)])
    feats = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    labels = np.array([3.0, np.nan, 1.0])
    return NetworkDataset(g, feats, labels)


def test_training_set_and_counts():
    ds = _toy_dataset()
    assert list(ds.training_set) == [0, 2]
    assert ds.num_labeled == 2
    assert ds.n == 3 and ds.p == 2


def test_dataset_validation():
    g = from_edge_list([(0, 1, 1.0)])
    with pytest.raises(ValueError, match="shape"):
        NetworkDataset(g, np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError, match="labels"):
        NetworkDataset(g, np.zeros((2, 2)), np.zeros(3))
    with pytest.raises(ValueError, match="finite"):
        NetworkDataset(g, np.full((2, 1), np.inf), np.zeros(2))
    with pytest.raises(ValueError, match="finite"):
        NetworkDataset(g, np.ones((2, 1)), np.array([np.inf, 0.0]))
    # all-unlabeled dataset constructs, but cannot be solved
    ds = NetworkDataset(g, np.ones((2, 1)), np.array([np.nan, np.nan]))
    with pytest.raises(ValueError, match="no labeled nodes"):
        ds.validate_for_solving()
    # labeled node with zero features is rejected at solve time
    ds2 = NetworkDataset(g, np.array([[0.0], [1.0]]), np.array([1.0, np.nan]))
    with pytest.raises(ValueError, match="zero feature"):
        ds2.validate_for_solving()


def test_predict_and_training_error():
    ds = _toy_dataset()
    w = np.array([[3.0, 5.0], [1.0, 1.0], [0.5, 0.0]])
    assert predict(w, ds, 0) == pytest.approx(3.0)
    assert predict(w, ds, 1) == pytest.approx(2.0)
    # |3 - 3| + |1 - 0.5| = 0.5
    assert training_error(w, ds) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        training_error(w, NetworkDataset(ds.graph, ds.features, np.full(3, np.nan)))


def test_piecewise_signal_and_partition():
    part = partition_from_clusters([[0, 2], [1]], 3)
    assert list(part.assignment) == [0, 1, 0]
    w = piecewise_signal(part, [[1.0, 2.0], [-1.0, 0.0]])
    assert np.allclose(w, [[1, 2], [-1, 0], [1, 2]])
    with pytest.raises(ValueError):
        piecewise_signal(part, [[1.0, 2.0]])
    with pytest.raises(ValueError, match="disjoint"):
        partition_from_clusters([[0, 1], [1, 2]], 3)
    with pytest.raises(ValueError, match="cover"):
        partition_from_clusters([[0], [1]], 3)
    with pytest.raises(ValueError, match="empty"):
        partition_from_clusters([[0, 1, 2], []], 3)


def test_partition_validation():
    with pytest.raises(ValueError, match="consecutive"):
        Partition(np.array([0, 2]))
    with pytest.raises(ValueError, match="non-negative"):
        Partition(np.array([-1, 0]))
    part = Partition(np.array([1, 0, 1]))
    assert part.num_clusters == 2
    assert [list(c) for c in part.clusters()] == [[1], [0, 2]]


def test_generate_labels_noise_kinds():
    rng_feats = np.random.default_rng(0)
    feats = rng_feats.normal(0, 1, (40, 2))
    w = np.ones((40, 2))
    clean = generate_labels(w, feats, NoiseSpec(kind="none"))
    assert np.allclose(clean, feats @ np.ones(2))

    g1 = generate_labels(w, feats, NoiseSpec(kind="gaussian", sigma=0.5, seed=4))
    g2 = generate_labels(w, feats, NoiseSpec(kind="gaussian", sigma=0.5, seed=4))
    assert np.array_equal(g1, g2)  # deterministic given seed
    assert not np.allclose(g1, clean)

    s = generate_labels(w, feats, NoiseSpec(kind="spikes", fraction=0.25, magnitude=9.0, seed=1))
    hit = np.abs(s - clean) > 1e-12
    assert hit.sum() == 10  # exactly round(fraction * n)
    assert np.allclose(np.abs((s - clean)[hit]), 9.0)

    with pytest.raises(ValueError, match="noise kind"):
        NoiseSpec(kind="laplace")
    with pytest.raises(ValueError, match="sigma"):
        NoiseSpec(kind="gaussian", sigma=-1.0)
    with pytest.raises(ValueError, match="fraction"):
        NoiseSpec(kind="spikes", fraction=1.5)


def test_nmse():
    w_true = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert nmse(w_true, w_true) == 0.0
    w_hat = w_true + 0.1
    expect = (0.1 ** 2 * 4) / 2.0
    assert nmse(w_true, w_hat) == pytest.approx(expect)
    # permutation of node order applied to both leaves it unchanged
    perm = [1, 0]
    assert nmse(w_true[perm], w_hat[perm]) == pytest.approx(nmse(w_true, w_hat))
    with pytest.raises(ValueError, match="zero"):
        nmse(np.zeros((2, 2)), w_hat)
    with pytest.raises(ValueError, match="shape"):
        nmse(w_true, np.zeros((3, 2)))


def test_theorem2_bound_values():
    # zero noise gives a zero bound
    assert theorem2_bound(2.0, 5.0, 2, 0.0) == 0.0
    # K=1, L=2*sqrt(p), noise=1: 1 * (1 + 4*sqrt(p)/sqrt(p)) * 1 = 5
    for p in (1, 2, 7):
        assert theorem2_bound(1.0, 2.0 * math.sqrt(p), p, 1.0) == pytest.approx(5.0)
    # domain edge: L <= sqrt(p) rejected
    with pytest.raises(ValueError, match="does not apply"):
        theorem2_bound(1.0, math.sqrt(2.0), 2, 1.0)
    with pytest.raises(ValueError, match="K"):
        theorem2_bound(0.0, 5.0, 2, 1.0)
    with pytest.raises(ValueError, match="noise"):
        theorem2_bound(1.0, 5.0, 2, -1.0)


def test_theorem2_bound_monotonicity():
    base = theorem2_bound(1.0, 3.0, 2, 1.0)
    assert theorem2_bound(2.0, 3.0, 2, 1.0) > base          # increasing in K
    assert theorem2_bound(1.0, 3.0, 2, 2.0) > base          # increasing in noise
    assert theorem2_bound(1.0, 4.0, 2, 1.0) < base          # decreasing in L


def test_piecewise_interior_tv_is_zero():
    rng = np.random.default_rng(5)
    g = random_graph(rng, 20, edge_prob=0.3)
    assignment = (rng.random(20) < 0.5).astype(np.int64)
    if assignment.max() == 0:
        assignment[0] = 1
    part = Partition(assignment)
    w = piecewise_signal(part, rng.normal(0, 1, (2, 3)))
    boundary = set(boundary_edges(g, part).tolist())
    interior = [e for e in range(g.q) if e not in boundary]
    assert tv_on_edge_subset(g, w, interior) == 0.0
    assert tv_on_edge_subset(g, w, boundary) == pytest.approx(total_variation(g, w))


def test_dataset_csv_round_trip(tmp_path):
    node_ids = np.array([2, 5, 9])
    feats = np.array([[0.25, -1.5], [2.0, 0.125], [1e-3, 3.0]])
    labels = np.array([1.5, np.nan, -0.75])
    path = tmp_path / "d.csv"
    write_dataset_csv(path, node_ids, feats, labels)
    ids2, feats2, labels2 = load_dataset_csv(path)
    assert np.array_equal(node_ids, ids2)
    assert np.array_equal(feats, feats2)
    assert labels2[0] == 1.5 and math.isnan(labels2[1]) and labels2[2] == -0.75
    write_dataset_csv(tmp_path / "d2.csv", ids2, feats2, labels2)
    assert (tmp_path / "d.csv").read_bytes() == (tmp_path / "d2.csv").read_bytes()


def test_dataset_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("node,x1,y\n0,1.0,2.0\n0,2.0,3.0\n")
    with pytest.raises(DatasetFormatError, match="line 3.*duplicate"):
        load_dataset_csv(path)
    path.write_text("node,x1,y\n0,1.0\n")
    with pytest.raises(DatasetFormatError, match="line 2.*fields"):
        load_dataset_csv(path)
    path.write_text("node,x1,y\n0,abc,2.0\n")
    with pytest.raises(DatasetFormatError, match="line 2.*feature"):
        load_dataset_csv(path)
    path.write_text("node,x1,y\n0,1.0,nan\n")
    with pytest.raises(DatasetFormatError, match="line 2.*NaN"):
        load_dataset_csv(path)
    path.write_text("node,x2,y\n0,1.0,2.0\n")
    with pytest.raises(DatasetFormatError, match="line 1.*header"):
        load_dataset_csv(path)
    path.write_text("node,x1,y\n")
    with pytest.raises(DatasetFormatError, match="no rows"):
        load_dataset_csv(path)


def test_load_network_dataset(tmp_path):
    # node table is authoritative: node 9 has no edges but exists
    (tmp_path / "g.csv").write_text("i,j,weight\n2,5,1.0\n")
    (tmp_path / "d.csv").write_text(
        "node,x1,y\n2,1.0,3.0\n5,2.0,\n9,1.5,0.5\n"
    )
    ds = load_network_dataset(tmp_path / "g.csv", tmp_path / "d.csv")
    assert ds.n == 3 and ds.graph.q == 1
    assert list(ds.training_set) == [0, 2]
    assert ds.graph.degrees[2] == 0.0


def test_partition_csv_round_trip(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("node,cluster_id\n5,10\n2,7\n9,10\n")
    part, ids = load_partition_csv(path)
    assert list(ids) == [2, 5, 9]
    assert list(part.cluster_ids) == [7, 10]
    assert list(part.assignment) == [0, 1, 1]
    out = tmp_path / "p2.csv"
    write_partition_csv(out, ids, part)
    part2, ids2 = load_partition_csv(out)
    assert np.array_equal(part.assignment, part2.assignment)
    assert np.array_equal(ids, ids2)
    with pytest.raises(DatasetFormatError, match="node set"):
        load_partition_csv(path, node_ids=[1, 2, 3])
