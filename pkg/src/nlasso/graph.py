"""Weighted undirected graphs and a matrix-free edge-difference operator.

Graphs are stored as a sorted node-id table plus flat edge arrays
(``edge_src``/``edge_dst``/``edge_weight``) indexed by internal positions
0..n-1.  Every edge is kept once with ``edge_src < edge_dst``; the fixed
orientation (+weight at the lower index, -weight at the higher one) defines
the edge-difference operator used throughout the package.  The penalty that
couples node vectors is invariant to this choice because it only sees norms
of per-edge differences.
"""

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels


class GraphFormatError(ValueError):
    """A graph file or edge list violates the expected format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class EmpiricalGraph:
    """Undirected graph with positive edge weights over integer node ids.

    Attributes
    ----------
    node_ids : (n,) int64
        Original node identifiers, strictly increasing.  Internal node
        index k corresponds to ``node_ids[k]``.
    edge_src, edge_dst : (q,) int64
        Internal endpoint indices with ``edge_src < edge_dst`` per edge,
        sorted lexicographically by (src, dst).
    edge_weight : (q,) float64
        Positive, finite edge weights A_e.
    degrees : (n,) float64
        Weighted node degrees (sum of incident edge weights).
    """

    node_ids: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_weight: np.ndarray
    degrees: np.ndarray

    @property
    def n(self):
        return int(self.node_ids.shape[0])

    @property
    def q(self):
        return int(self.edge_src.shape[0])

    def index_of(self, node_id):
        """Map an original node id to its internal index."""
        pos = int(np.searchsorted(self.node_ids, node_id))
        if pos >= self.n or self.node_ids[pos] != node_id:
            raise KeyError(f"unknown node id {node_id}")
        return pos

    def edges(self):
        """Iterate (src_index, dst_index, weight) triples in canonical order."""
        for e in range(self.q):
            yield (
                int(self.edge_src[e]),
                int(self.edge_dst[e]),
                float(self.edge_weight[e]),
            )


def from_edge_list(edges, node_ids=None):
    """Build an EmpiricalGraph from (i, j, weight) triples in original ids.

    When ``node_ids`` is None the node set is the sorted set of endpoints;
    otherwise it is taken as authoritative (allowing isolated nodes) and
    endpoints outside it are rejected.
    """
    triples = [(int(i), int(j), float(w)) for i, j, w in edges]
    if node_ids is None:
        endpoint_ids = sorted({i for i, _, _ in triples} | {j for _, j, _ in triples})
        ids = np.asarray(endpoint_ids, dtype=np.int64)
    else:
        ids = np.asarray(sorted(int(v) for v in node_ids), dtype=np.int64)
        if ids.size != np.unique(ids).size:
            raise GraphFormatError("duplicate node ids in node table")
    n = ids.shape[0]

    seen = set()
    rows = []
    for i, j, w in triples:
        if i == j:
            raise GraphFormatError(f"self-loop at node {i}")
        if not np.isfinite(w) or w <= 0.0:
            raise GraphFormatError(f"edge ({i},{j}) has non-positive weight {w!r}")
        try:
            a = _index_in(ids, i)
            b = _index_in(ids, j)
        except KeyError as exc:
            raise GraphFormatError(str(exc)) from None
        if a > b:
            a, b = b, a
        if (a, b) in seen:
            raise GraphFormatError(
                f"duplicate edge between nodes {ids[a]} and {ids[b]}"
            )
        seen.add((a, b))
        rows.append((a, b, w))

    rows.sort(key=lambda r: (r[0], r[1]))
    src = np.asarray([r[0] for r in rows], dtype=np.int64)
    dst = np.asarray([r[1] for r in rows], dtype=np.int64)
    wts = np.asarray([r[2] for r in rows], dtype=np.float64)
    deg = np.zeros(n)
    np.add.at(deg, src, wts)
    np.add.at(deg, dst, wts)
    return EmpiricalGraph(ids, src, dst, wts, deg)


def _index_in(sorted_ids, node_id):
    pos = int(np.searchsorted(sorted_ids, node_id))
    if pos >= sorted_ids.shape[0] or sorted_ids[pos] != node_id:
        raise KeyError(f"unknown node id {node_id}")
    return pos


def apply_incidence(graph, w):
    """Edge-difference map: returns the (q, p) array with rows A_e*(w_i - w_j)."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != graph.n:
        raise ValueError(f"expected node signal of shape ({graph.n}, p)")
    return _kernels.incidence_apply(
        graph.edge_src, graph.edge_dst, graph.edge_weight, np.ascontiguousarray(w)
    )


def apply_incidence_adjoint(graph, u):
    """Adjoint of apply_incidence: scatter +A_e*u_e to src and -A_e*u_e to dst."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] != graph.q:
        raise ValueError(f"expected edge signal of shape ({graph.q}, p)")
    return _kernels.incidence_adjoint(
        graph.edge_src, graph.edge_dst, graph.edge_weight, np.ascontiguousarray(u), graph.n
    )


def total_variation(graph, w):
    """Weighted total variation: sum over edges of A_e * ||w_i - w_j||_2."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != graph.n:
        raise ValueError(f"expected node signal of shape ({graph.n}, p)")
    return float(
        _kernels.tv_sum(
            graph.edge_src, graph.edge_dst, graph.edge_weight, np.ascontiguousarray(w)
        )
    )


def tv_on_edge_subset(graph, w, edge_ids):
    """Total variation restricted to the given edge positions.

    ``edge_ids`` is any iterable of edge positions (0..q-1); duplicates are
    collapsed.  Unknown positions raise ValueError.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != graph.n:
        raise ValueError(f"expected node signal of shape ({graph.n}, p)")
    ids = np.unique(np.asarray(list(edge_ids), dtype=np.int64))
    if ids.size == 0:
        return 0.0
    if ids[0] < 0 or ids[-1] >= graph.q:
        bad = ids[0] if ids[0] < 0 else ids[-1]
        raise ValueError(f"unknown edge id {bad}")
    return float(
        _kernels.tv_sum(
            graph.edge_src[ids],
            graph.edge_dst[ids],
            graph.edge_weight[ids],
            np.ascontiguousarray(w),
        )
    )


GRAPH_HEADER = ["i", "j", "weight"]


def load_graph_csv(path, node_ids=None):
    """Read an edge-list CSV with header ``i,j,weight``.

    Node ids are arbitrary integers.  Self-loops, duplicate edges (in either
    orientation), malformed fields and non-positive weights are rejected with
    a line-numbered GraphFormatError.  ``node_ids``, when given, fixes the
    node set (needed to represent isolated nodes, which an edge list alone
    cannot express).
    """
    triples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != GRAPH_HEADER:
            raise GraphFormatError(
                f"expected header {','.join(GRAPH_HEADER)!r}", line=1
            )
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise GraphFormatError(
                    f"expected 3 fields, got {len(row)}", line=lineno
                )
            try:
                i = int(row[0])
                j = int(row[1])
            except ValueError:
                raise GraphFormatError(
                    f"non-integer node id in {row[:2]!r}", line=lineno
                ) from None
            try:
                w = float(row[2])
            except ValueError:
                raise GraphFormatError(
                    f"non-numeric weight {row[2]!r}", line=lineno
                ) from None
            if i == j:
                raise GraphFormatError(f"self-loop at node {i}", line=lineno)
            if not np.isfinite(w) or w <= 0.0:
                raise GraphFormatError(
                    f"weight must be positive and finite, got {row[2]!r}",
                    line=lineno,
                )
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphFormatError(
                    f"duplicate edge between nodes {key[0]} and {key[1]}",
                    line=lineno,
                )
            seen.add(key)
            triples.append((i, j, w))
    return from_edge_list(triples, node_ids=node_ids)


def write_graph_csv(path, graph):
    """Write the canonical edge-list CSV (original ids, sorted edge order)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRAPH_HEADER)
        for a, b, w in graph.edges():
            writer.writerow(
                [int(graph.node_ids[a]), int(graph.node_ids[b]), repr(float(w))]
            )
