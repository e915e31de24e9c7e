"""Instance generators: two-cluster graphs, k-NN graphs, weather-style data."""

import numpy as np
import pytest

from nlasso import (
    DatasetFormatError,
    NoiseSpec,
    TwoClusterSpec,
    knn_graph,
    load_coords_csv,
    synthetic_weather,
    two_cluster_instance,
    write_coords_csv,
)


def test_two_cluster_spec_validation():
    TwoClusterSpec()
    with pytest.raises(ValueError, match="even"):
        TwoClusterSpec(n=7)
    with pytest.raises(ValueError, match="even"):
        TwoClusterSpec(n=2)
    with pytest.raises(ValueError, match="avg_degree"):
        TwoClusterSpec(n=10, avg_degree=5.0)  # max is half - 1 = 4
    with pytest.raises(ValueError, match="avg_degree"):
        TwoClusterSpec(n=10, avg_degree=0.0)
    with pytest.raises(ValueError, match="inter_edges"):
        TwoClusterSpec(n=10, avg_degree=3.0, inter_edges=26)
    with pytest.raises(ValueError, match="labels_per_cluster"):
        TwoClusterSpec(n=10, avg_degree=3.0, labels_per_cluster=6)


def test_two_cluster_structure():
    spec = TwoClusterSpec(n=20, avg_degree=4.0, inter_edges=3, labels_per_cluster=2, seed=5)
    ds, part, w_true = two_cluster_instance(spec, p=2, separation=1.5)
    assert ds.n == 20 and ds.p == 2
    # nodes 0..9 are cluster 0
    assert np.array_equal(part.assignment, np.repeat([0, 1], 10))
    assert np.allclose(w_true[:10], 1.5)
    assert np.allclose(w_true[10:], -1.5)
    # features live on the unit sphere
    assert np.allclose(np.linalg.norm(ds.features, axis=1), 1.0)
    # exactly the requested number of cluster-crossing edges
    cross = sum(1 for i, j, _ in ds.graph.edges() if i < 10 <= j)
    assert cross == 3
    assert np.all([w == 1.0 for _, _, w in ds.graph.edges()])
    # two labels per cluster, exact inner products without noise
    m = ds.training_set
    assert m.size == 4
    assert (part.assignment[m] == 0).sum() == 2
    assert (part.assignment[m] == 1).sum() == 2
    preds = np.sum(w_true[m] * ds.features[m], axis=1)
    assert np.allclose(ds.labels[m], preds)


def test_two_cluster_determinism_and_noise():
    spec = TwoClusterSpec(n=16, avg_degree=3.0, inter_edges=2, labels_per_cluster=2, seed=9)
    a = two_cluster_instance(spec, p=3)
    b = two_cluster_instance(spec, p=3)
    assert np.array_equal(a[0].features, b[0].features)
    assert np.array_equal(a[0].labels, b[0].labels, equal_nan=True)
    assert np.array_equal(a[0].graph.edge_src, b[0].graph.edge_src)
    noisy, _, w_true = two_cluster_instance(
        spec, p=3, noise=NoiseSpec(kind="gaussian", sigma=0.3, seed=2)
    )
    m = noisy.training_set
    clean_preds = np.sum(w_true[m] * noisy.features[m], axis=1)
    assert not np.allclose(noisy.labels[m], clean_preds)
    with pytest.raises(ValueError, match="p"):
        two_cluster_instance(spec, p=0)
    with pytest.raises(ValueError, match="separation"):
        two_cluster_instance(spec, p=1, separation=0.0)


def test_two_cluster_zero_extremes():
    # no crossing edges and no labels are both representable
    spec = TwoClusterSpec(n=8, avg_degree=2.0, inter_edges=0, labels_per_cluster=0, seed=0)
    ds, _, _ = two_cluster_instance(spec, p=1)
    assert not any(i < 4 <= j for i, j, _ in ds.graph.edges())
    assert ds.num_labeled == 0


def test_knn_graph_line():
    g = knn_graph(np.array([[0.0], [1.0], [2.0], [10.0]]), 1)
    assert [(i, j) for i, j, _ in g.edges()] == [(0, 1), (1, 2), (2, 3)]
    # exact tie at node 1 breaks toward the lower index
    g2 = knn_graph(np.array([[0.0], [1.0], [2.0]]), 1)
    assert [(i, j) for i, j, _ in g2.edges()] == [(0, 1), (1, 2)]


def test_knn_graph_properties():
    rng = np.random.default_rng(3)
    coords = rng.normal(0, 1, (25, 2))
    for k in (1, 3, 6):
        g = knn_graph(coords, k)
        # symmetrized union: every node keeps at least its own k neighbors
        assert g.degrees.min() >= k
        assert np.all(g.edge_weight == 1.0)
        # edge set reflects the neighbor lists exactly
        d2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2)
        np.fill_diagonal(d2, np.inf)
        order = np.argsort(d2, axis=1, kind="stable")[:, :k]
        expected = set()
        for i in range(25):
            for j in order[i]:
                expected.add((min(i, int(j)), max(i, int(j))))
        assert {(i, j) for i, j, _ in g.edges()} == expected


def test_knn_graph_validation():
    with pytest.raises(ValueError, match="duplicate"):
        knn_graph(np.array([[1.0, 2.0], [1.0, 2.0], [3.0, 4.0]]), 1)
    with pytest.raises(ValueError, match="k must"):
        knn_graph(np.array([[0.0], [1.0]]), 2)
    with pytest.raises(ValueError, match="k must"):
        knn_graph(np.array([[0.0], [1.0]]), 0)
    with pytest.raises(ValueError, match="coords"):
        knn_graph(np.array([[0.0]]), 1)


def test_synthetic_weather_shape_and_determinism():
    ds = synthetic_weather(n_stations=30, days=30, seed=0)
    assert ds.n == 30 and ds.p == 3
    assert ds.num_labeled == 30  # fully labeled
    assert ds.graph.degrees.min() >= 3.0
    ds2 = synthetic_weather(n_stations=30, days=30, seed=0)
    assert np.array_equal(ds.features, ds2.features)
    assert np.array_equal(ds.labels, ds2.labels)
    ds3 = synthetic_weather(n_stations=30, days=30, seed=1)
    assert not np.array_equal(ds.labels, ds3.labels)
    with pytest.raises(ValueError, match="stations"):
        synthetic_weather(n_stations=4)
    with pytest.raises(ValueError, match="days"):
        synthetic_weather(days=3)


def test_synthetic_weather_temporal_coherence():
    # within a regime, yesterday's temperature tracks today's closely
    ds = synthetic_weather(n_stations=30, days=30, seed=0)
    n_south = (30 + 1) // 2
    south = np.corrcoef(ds.features[:n_south, 0], ds.labels[:n_south])[0, 1]
    north = np.corrcoef(ds.features[n_south:, 0], ds.labels[n_south:])[0, 1]
    assert south > 0.9 and north > 0.9


def test_coords_csv_round_trip(tmp_path):
    node_ids = np.array([1, 4, 6])
    coords = np.array([[60.5, 23.25], [61.0, 24.0], [66.125, 26.5]])
    path = tmp_path / "c.csv"
    write_coords_csv(path, node_ids, coords)
    ids2, coords2 = load_coords_csv(path)
    assert np.array_equal(node_ids, ids2)
    assert np.array_equal(coords, coords2)
    write_coords_csv(tmp_path / "c2.csv", ids2, coords2)
    assert path.read_bytes() == (tmp_path / "c2.csv").read_bytes()


def test_coords_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("node,cx\n0,1.0\n")
    with pytest.raises(DatasetFormatError, match="line 1"):
        load_coords_csv(path)
    path.write_text("node,c1\n0,1.0\n0,2.0\n")
    with pytest.raises(DatasetFormatError, match="line 3.*duplicate"):
        load_coords_csv(path)
    path.write_text("node,c1,c2\n0,1.0\n")
    with pytest.raises(DatasetFormatError, match="line 2.*fields"):
        load_coords_csv(path)
    path.write_text("node,c1\nzero,1.0\n")
    with pytest.raises(DatasetFormatError, match="line 2.*node id"):
        load_coords_csv(path)
    path.write_text("node,c1\n0,east\n")
    with pytest.raises(DatasetFormatError, match="line 2.*non-numeric"):
        load_coords_csv(path)
    path.write_text("node,c1\n")
    with pytest.raises(DatasetFormatError, match="no rows"):
        load_coords_csv(path)
