"""Synthetic instance generators: two-cluster graphs, k-NN graphs, and a
weather-station-style dataset.

All generators are deterministic for a fixed seed and emit the same graph /
dataset structures the loaders produce, so generated instances round-trip
through the CSV formats.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .graph import from_edge_list
from .model import (
    DatasetFormatError,
    NetworkDataset,
    NoiseSpec,
    Partition,
    generate_labels,
    piecewise_signal,
)


@dataclass(frozen=True)
class TwoClusterSpec:
    """Parameters for the two-cluster instance family.

    n nodes split into two equal clusters; each cluster is wired as an
    Erdos-Renyi graph with expected degree ``avg_degree``; ``inter_edges``
    uniformly random cluster-crossing edges; ``labels_per_cluster`` nodes
    per cluster keep their labels.
    """

    n: int = 80
    avg_degree: float = 10.0
    inter_edges: int = 5
    labels_per_cluster: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError("n must be an even integer >= 4")
        half = self.n // 2
        if not 0.0 < self.avg_degree <= half - 1:
            raise ValueError(
                f"avg_degree must lie in (0, {half - 1}] for n = {self.n}"
            )
        if not 0 <= self.inter_edges <= half * half:
            raise ValueError(
                f"inter_edges must lie in [0, {half * half}] for n = {self.n}"
            )
        if not 0 <= self.labels_per_cluster <= half:
            raise ValueError("labels_per_cluster must lie in [0, n/2]")


def two_cluster_instance(spec, p, separation=1.0, noise=None):
    """Generate (dataset, partition, true_weights) for a two-cluster instance.

    Features are i.i.d. uniform on the unit sphere in R^p; the true weights
    are piecewise constant with cluster vectors +-separation * (1, ..., 1);
    labels are exact inner products plus optional noise; all edge weights
    are 1.  Nodes 0..n/2-1 form cluster 0.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if separation <= 0.0:
        raise ValueError("separation must be positive")
    noise = NoiseSpec(kind="none") if noise is None else noise
    half = spec.n // 2
    p_edge = spec.avg_degree / (half - 1)
    rng = np.random.default_rng(spec.seed)

    edges = []
    iu, ju = np.triu_indices(half, k=1)
    for base in (0, half):
        mask = rng.random(iu.size) < p_edge
        for a, b in zip(iu[mask], ju[mask]):
            edges.append((base + int(a), base + int(b), 1.0))
    if spec.inter_edges > 0:
        chosen = rng.choice(half * half, size=spec.inter_edges, replace=False)
        for c in np.sort(chosen):
            edges.append((int(c // half), half + int(c % half), 1.0))

    feats = rng.standard_normal((spec.n, p))
    norms = np.sqrt(np.sum(feats * feats, axis=1))
    while np.any(norms < 1e-12):
        redo = norms < 1e-12
        feats[redo] = rng.standard_normal((int(np.sum(redo)), p))
        norms = np.sqrt(np.sum(feats * feats, axis=1))
    feats /= norms[:, None]

    assignment = np.zeros(spec.n, dtype=np.int64)
    assignment[half:] = 1
    partition = Partition(assignment)
    vectors = np.vstack(
        [np.full(p, separation), np.full(p, -separation)]
    )
    w_true = piecewise_signal(partition, vectors)
    full_labels = generate_labels(w_true, feats, noise)

    labels = np.full(spec.n, np.nan)
    if spec.labels_per_cluster > 0:
        m1 = rng.choice(half, size=spec.labels_per_cluster, replace=False)
        m2 = half + rng.choice(half, size=spec.labels_per_cluster, replace=False)
        keep = np.concatenate([m1, m2])
        labels[keep] = full_labels[keep]

    graph = from_edge_list(edges, node_ids=range(spec.n))
    dataset = NetworkDataset(graph, feats, labels)
    return dataset, partition, w_true


def knn_graph(coords, k):
    """Symmetrized k-nearest-neighbor graph with unit weights.

    {i, j} is an edge iff j is among i's k nearest points (Euclidean) or
    vice versa.  Duplicate points make nearest neighbors ambiguous and are
    rejected.  Exact distance ties are broken toward the lower index.
    """
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[0] < 2:
        raise ValueError("coords must be an (n >= 2, d) array")
    n = coords.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"k must lie in [1, {n - 1}]")
    diffs = coords[:, None, :] - coords[None, :, :]
    d2 = np.sum(diffs * diffs, axis=2)
    off_diag = ~np.eye(n, dtype=bool)
    if np.any(d2[off_diag] == 0.0):
        where = np.argwhere((d2 == 0.0) & off_diag)[0]
        raise ValueError(
            f"duplicate coordinates at points {int(where[0])} and {int(where[1])}"
        )
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    pairs = set()
    for i in range(n):
        for j in order[i]:
            a, b = (i, int(j)) if i < j else (int(j), i)
            pairs.add((a, b))
    return from_edge_list(
        [(a, b, 1.0) for a, b in sorted(pairs)], node_ids=range(n)
    )


def synthetic_weather(n_stations=30, days=30, seed=0):
    """Weather-station stand-in: two latitude regimes with AR temperature series.

    Stations 0..ceil(n/2)-1 sit in the warmer southern regime, the rest in
    the north.  Each station's daily series is its regime mean plus a shared
    regime-level AR(1) signal, a station offset, and small local noise.
    Features are the three previous days' temperatures (x1 = one day back),
    the label is the current day's; the graph joins each station to its 3
    nearest neighbors.  Fully labeled; callers mask labels as needed.
    """
    if n_stations < 5:
        raise ValueError("need at least 5 stations")
    if days < 4:
        raise ValueError("need at least 4 days of history")
    rng = np.random.default_rng(seed)
    n_south = (n_stations + 1) // 2
    n_north = n_stations - n_south

    lat = np.concatenate(
        [60.0 + rng.normal(0.0, 0.5, n_south), 66.0 + rng.normal(0.0, 0.5, n_north)]
    )
    lon = np.concatenate(
        [23.0 + rng.normal(0.0, 1.5, n_south), 26.0 + rng.normal(0.0, 1.5, n_north)]
    )
    coords = np.column_stack([lat, lon])

    regime_mean = np.array([3.0, -5.0])
    offsets = rng.normal(0.0, 0.8, n_stations)
    regional = np.zeros((2, days))
    for t in range(1, days):
        regional[:, t] = 0.9 * regional[:, t - 1] + rng.normal(0.0, 2.0, 2)
    local = rng.normal(0.0, 0.25, (n_stations, days))

    regime = np.zeros(n_stations, dtype=np.int64)
    regime[n_south:] = 1
    temps = (
        regime_mean[regime][:, None]
        + offsets[:, None]
        + regional[regime]
        + local
    )

    features = np.column_stack(
        [temps[:, days - 2], temps[:, days - 3], temps[:, days - 4]]
    )
    labels = temps[:, days - 1].copy()
    graph = knn_graph(coords, 3)
    return NetworkDataset(graph, features, labels)


COORDS_HEADER_PREFIX = "node"


def load_coords_csv(path):
    """Read a coordinates CSV with header ``node,c1,...,cd``.

    Returns (node_ids, coords) sorted by node id; duplicate ids and ragged
    rows are rejected with line numbers.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DatasetFormatError("expected header 'node,c1,...,cd'", line=1)
        header = [h.strip() for h in header]
        d = len(header) - 1
        expected = ["node"] + [f"c{k}" for k in range(1, d + 1)]
        if header != expected:
            raise DatasetFormatError(
                f"expected header {','.join(expected)!r}", line=1
            )
        rows = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != d + 1:
                raise DatasetFormatError(
                    f"expected {d + 1} fields, got {len(row)}", line=lineno
                )
            try:
                node = int(row[0])
            except ValueError:
                raise DatasetFormatError(
                    f"non-integer node id {row[0]!r}", line=lineno
                ) from None
            if node in seen:
                raise DatasetFormatError(f"duplicate node id {node}", line=lineno)
            seen.add(node)
            try:
                vals = [float(v) for v in row[1:]]
            except ValueError:
                raise DatasetFormatError(
                    f"non-numeric coordinate for node {node}", line=lineno
                ) from None
            rows.append((node, vals))
    if not rows:
        raise DatasetFormatError("coordinates file has no rows")
    rows.sort(key=lambda r: r[0])
    node_ids = np.asarray([r[0] for r in rows], dtype=np.int64)
    coords = np.asarray([r[1] for r in rows], dtype=np.float64)
    return node_ids, coords


def write_coords_csv(path, node_ids, coords):
    """Write the coordinates CSV consumed by load_coords_csv."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    coords = np.asarray(coords, dtype=np.float64)
    d = coords.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"c{k}" for k in range(1, d + 1)])
        for k in range(node_ids.shape[0]):
            writer.writerow(
                [int(node_ids[k])] + [repr(float(v)) for v in coords[k]]
            )
