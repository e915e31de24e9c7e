"""Datasets, partitions, signal construction and error metrics.

A dataset couples an EmpiricalGraph with one feature vector and one
(possibly missing) scalar label per node.  Missing labels are stored as
NaN; the training set is the index set of nodes whose label is present.
Weight matrices ``w`` are (n, p) float64 arrays, one row per node.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .graph import EmpiricalGraph, load_graph_csv


class DatasetFormatError(ValueError):
    """A dataset or partition file violates the expected format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class NoiseSpec:
    """Label noise description for synthetic data.

    kind is one of ``none``, ``gaussian`` (i.i.d. normal with std ``sigma``)
    or ``spikes`` (a random ``fraction`` of labels shifted by +-``magnitude``).
    """

    kind: str = "none"
    sigma: float = 0.0
    fraction: float = 0.0
    magnitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "spikes"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")

    def sample(self, size):
        """Draw the additive noise vector for the given number of labels."""
        rng = np.random.default_rng(self.seed)
        eps = np.zeros(size)
        if self.kind == "gaussian" and self.sigma > 0.0:
            eps = rng.normal(0.0, self.sigma, size)
        elif self.kind == "spikes" and self.fraction > 0.0:
            count = int(round(self.fraction * size))
            if count > 0:
                hit = rng.choice(size, size=count, replace=False)
                signs = rng.choice(np.array([-1.0, 1.0]), size=count)
                eps[hit] = signs * self.magnitude
        return eps


@dataclass(frozen=True)
class Partition:
    """Disjoint clusters covering all n nodes.

    ``assignment[k]`` is the cluster index (0..F-1) of internal node k;
    ``cluster_ids`` keeps the original cluster labels in index order.
    """

    assignment: np.ndarray
    cluster_ids: np.ndarray = None

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.int64)
        object.__setattr__(self, "assignment", assignment)
        if assignment.ndim != 1 or assignment.size == 0:
            raise ValueError("assignment must be a non-empty 1-d array")
        count = int(assignment.max()) + 1
        if assignment.min() < 0:
            raise ValueError("cluster indices must be non-negative")
        present = np.unique(assignment)
        if present.size != count:
            raise ValueError("cluster indices must be consecutive from 0")
        if self.cluster_ids is None:
            object.__setattr__(self, "cluster_ids", np.arange(count, dtype=np.int64))
        else:
            ids = np.asarray(self.cluster_ids, dtype=np.int64)
            if ids.shape != (count,):
                raise ValueError("cluster_ids must have one entry per cluster")
            object.__setattr__(self, "cluster_ids", ids)

    @property
    def n(self):
        return int(self.assignment.shape[0])

    @property
    def num_clusters(self):
        return int(self.cluster_ids.shape[0])

    def clusters(self):
        """List of index arrays, one per cluster, in cluster-index order."""
        return [
            np.nonzero(self.assignment == l)[0]
            for l in range(self.num_clusters)
        ]


def partition_from_clusters(clusters, n):
    """Build a Partition from an ordered list of disjoint node-index sets."""
    assignment = np.full(n, -1, dtype=np.int64)
    for l, nodes in enumerate(clusters):
        idx = np.asarray(list(nodes), dtype=np.int64)
        if idx.size == 0:
            raise ValueError(f"cluster {l} is empty")
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError(f"cluster {l} contains out-of-range node indices")
        if np.any(assignment[idx] >= 0):
            raise ValueError("clusters must be disjoint")
        assignment[idx] = l
    if np.any(assignment < 0):
        raise ValueError("clusters must cover every node")
    return Partition(assignment)


@dataclass
class NetworkDataset:
    """Graph plus per-node features and (possibly missing) scalar labels."""

    graph: EmpiricalGraph
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] != self.graph.n:
            raise ValueError(
                f"features must have shape ({self.graph.n}, p)"
            )
        if feats.shape[1] == 0:
            raise ValueError("need at least one feature")
        if labels.shape != (self.graph.n,):
            raise ValueError(f"labels must have shape ({self.graph.n},)")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        present = ~np.isnan(labels)
        if np.any(~np.isfinite(labels[present])):
            raise ValueError("present labels must be finite")
        self.features = feats
        self.labels = labels

    @property
    def n(self):
        return self.graph.n

    @property
    def p(self):
        return int(self.features.shape[1])

    @property
    def training_set(self):
        """Indices of nodes whose label is present, in increasing order."""
        return np.nonzero(~np.isnan(self.labels))[0].astype(np.int64)

    @property
    def num_labeled(self):
        return int(self.training_set.shape[0])

    def validate_for_solving(self):
        """Check the conditions the solver relies on; raise ValueError if violated."""
        m = self.training_set
        if m.size == 0:
            raise ValueError("no labeled nodes: nothing to fit")
        norms = np.sqrt(np.sum(self.features[m] * self.features[m], axis=1))
        if np.any(norms <= 0.0):
            bad = int(self.graph.node_ids[m[int(np.argmin(norms))]])
            raise ValueError(f"labeled node {bad} has a zero feature vector")


def predict(w, dataset, node_index):
    """Prediction at one node: inner product of its weight row and features."""
    return float(np.dot(w[node_index], dataset.features[node_index]))


def training_error(w, dataset):
    """Sum of absolute residuals |y_i - x_i.w_i| over the labeled nodes."""
    m = dataset.training_set
    if m.size == 0:
        raise ValueError("no labeled nodes: training error undefined")
    preds = np.sum(dataset.features[m] * np.asarray(w, dtype=np.float64)[m], axis=1)
    return float(np.sum(np.abs(dataset.labels[m] - preds)))


def piecewise_signal(partition, vectors):
    """Stack cluster vectors into an (n, p) matrix: row i gets its cluster's vector."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != partition.num_clusters:
        raise ValueError(
            f"need exactly {partition.num_clusters} cluster vectors"
        )
    return arr[partition.assignment]


def generate_labels(w_true, features, noise):
    """Labels y_i = x_i.w_i plus additive noise drawn per the NoiseSpec."""
    w_true = np.asarray(w_true, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    if w_true.shape != features.shape:
        raise ValueError("w_true and features must have matching shapes")
    clean = np.sum(features * w_true, axis=1)
    return clean + noise.sample(clean.shape[0])


def nmse(w_true, w_hat):
    """Normalized mean squared error ||w_hat - w_true||^2 / ||w_true||^2 (stacked)."""
    w_true = np.asarray(w_true, dtype=np.float64)
    w_hat = np.asarray(w_hat, dtype=np.float64)
    if w_true.shape != w_hat.shape:
        raise ValueError("shape mismatch between true and estimated weights")
    denom = float(np.sum(w_true * w_true))
    if denom == 0.0:
        raise ValueError("true signal is identically zero: NMSE undefined")
    diff = w_hat - w_true
    return float(np.sum(diff * diff)) / denom


def theorem2_bound(K, L, p, noise_l1):
    """Upper bound on the estimator's total variation error.

    Defined for L > sqrt(p); K is the positive constant whose reciprocal is
    the penalty strength and noise_l1 the l1 norm of the label noise on the
    training set.
    """
    if K <= 0.0:
        raise ValueError("K must be positive")
    if noise_l1 < 0.0:
        raise ValueError("noise_l1 must be non-negative")
    root_p = math.sqrt(p)
    if not L > root_p:
        raise ValueError(
            f"bound does not apply: L={L!r} must exceed sqrt(p)={root_p!r}"
        )
    return K * (1.0 + 4.0 * root_p / (L - root_p)) * noise_l1


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def load_dataset_csv(path):
    """Read a node-table CSV with header ``node,x1,...,xp,y``.

    An empty y field marks an unlabeled node.  Returns (node_ids, features,
    labels) with rows sorted by node id; duplicate ids, ragged rows and
    malformed numbers are rejected with a line-numbered DatasetFormatError.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3:
            raise DatasetFormatError(
                "expected header 'node,x1,...,xp,y'", line=1
            )
        header = [h.strip() for h in header]
        p = len(header) - 2
        expected = ["node"] + [f"x{k}" for k in range(1, p + 1)] + ["y"]
        if header != expected:
            raise DatasetFormatError(
                f"expected header {','.join(expected)!r}", line=1
            )
        rows = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != p + 2:
                raise DatasetFormatError(
                    f"expected {p + 2} fields, got {len(row)}", line=lineno
                )
            try:
                node = int(row[0])
            except ValueError:
                raise DatasetFormatError(
                    f"non-integer node id {row[0]!r}", line=lineno
                ) from None
            if node in seen:
                raise DatasetFormatError(
                    f"duplicate node id {node}", line=lineno
                )
            seen.add(node)
            try:
                feats = [float(v) for v in row[1:-1]]
            except ValueError:
                raise DatasetFormatError(
                    f"non-numeric feature in row for node {node}", line=lineno
                ) from None
            ytxt = row[-1].strip()
            if ytxt == "":
                y = math.nan
            else:
                try:
                    y = float(ytxt)
                except ValueError:
                    raise DatasetFormatError(
                        f"non-numeric label {row[-1]!r}", line=lineno
                    ) from None
                if math.isnan(y):
                    raise DatasetFormatError(
                        "literal NaN label not allowed; leave y empty instead",
                        line=lineno,
                    )
            rows.append((node, feats, y))
    if not rows:
        raise DatasetFormatError("dataset has no rows")
    rows.sort(key=lambda r: r[0])
    node_ids = np.asarray([r[0] for r in rows], dtype=np.int64)
    features = np.asarray([r[1] for r in rows], dtype=np.float64)
    labels = np.asarray([r[2] for r in rows], dtype=np.float64)
    return node_ids, features, labels


def write_dataset_csv(path, node_ids, features, labels):
    """Write the node-table CSV; NaN labels become empty y fields."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    p = features.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [f"x{k}" for k in range(1, p + 1)] + ["y"])
        for k in range(node_ids.shape[0]):
            y = labels[k]
            ytxt = "" if math.isnan(y) else repr(float(y))
            writer.writerow(
                [int(node_ids[k])]
                + [repr(float(v)) for v in features[k]]
                + [ytxt]
            )


def load_network_dataset(graph_path, dataset_path):
    """Load a dataset CSV plus its graph CSV into a NetworkDataset.

    The dataset's node table is authoritative: the graph is loaded against
    it, so nodes without incident edges are representable.
    """
    node_ids, features, labels = load_dataset_csv(dataset_path)
    graph = load_graph_csv(graph_path, node_ids=node_ids)
    return NetworkDataset(graph, features, labels)


def load_partition_csv(path, node_ids=None):
    """Read a partition CSV with header ``node,cluster_id``.

    Returns a Partition over the sorted node set of the file.  When
    ``node_ids`` is given the file must cover exactly that node set.
    Cluster indices are assigned by sorted original cluster id and the
    original ids are kept in ``cluster_ids``.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node", "cluster_id"]:
            raise DatasetFormatError("expected header 'node,cluster_id'", line=1)
        rows = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise DatasetFormatError(
                    f"expected 2 fields, got {len(row)}", line=lineno
                )
            try:
                node = int(row[0])
                cluster = int(row[1])
            except ValueError:
                raise DatasetFormatError(
                    f"non-integer value in {row!r}", line=lineno
                ) from None
            if node in seen:
                raise DatasetFormatError(f"duplicate node id {node}", line=lineno)
            seen.add(node)
            rows.append((node, cluster))
    if not rows:
        raise DatasetFormatError("partition has no rows")
    rows.sort(key=lambda r: r[0])
    file_ids = np.asarray([r[0] for r in rows], dtype=np.int64)
    if node_ids is not None:
        expected = np.asarray(sorted(int(v) for v in node_ids), dtype=np.int64)
        if file_ids.shape != expected.shape or np.any(file_ids != expected):
            raise DatasetFormatError(
                "partition node set does not match the dataset node set"
            )
    raw = np.asarray([r[1] for r in rows], dtype=np.int64)
    uniq = np.unique(raw)
    dense = np.searchsorted(uniq, raw)
    partition = Partition(dense.astype(np.int64), cluster_ids=uniq)
    return partition, file_ids


def write_partition_csv(path, node_ids, partition):
    """Write the partition CSV using original node and cluster ids."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "cluster_id"])
        for k in range(node_ids.shape[0]):
            writer.writerow(
                [int(node_ids[k]), int(partition.cluster_ids[partition.assignment[k]])]
            )
