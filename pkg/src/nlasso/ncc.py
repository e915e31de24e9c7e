"""Connectivity certification between labeled nodes and cluster boundaries.

For a partition of the graph into clusters, each cluster l gets a normalized
flow value rho_l: the maximum flow from its labeled nodes to its boundary,
divided by the total weight of its boundary edges.  The flow network gives
every labeled node a source arc with capacity equal to its weighted degree,
routes flow through intra-cluster edges at their weights (both directions),
and drains through the cluster-side endpoint of every boundary edge into the
sink without restriction.  A labeled set that can cover each boundary edge's
weight from nearby label capacity yields rho_l > 1; the certification
threshold is sqrt(p), where p is the feature dimension.  Clusters with no
boundary at all get rho_l = +inf (nothing to leak across), and clusters with
no labeled nodes get rho_l = 0.
"""

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np


class FlowNetworkError(ValueError):
    """Invalid flow-network query (bad node, source equals sink, ...)."""


class FlowNetwork:
    """Directed flow network solved by BFS augmenting paths.

    Arcs are stored as index-paired forward/reverse entries so residual
    updates are O(1).  Capacities may be ``math.inf``; augmenting paths have
    finite bottleneck whenever some cut separating source and sink is finite.
    """

    def __init__(self, num_nodes):
        if num_nodes < 2:
            raise FlowNetworkError("need at least two nodes")
        self.num_nodes = num_nodes
        self.arc_to = []
        self.arc_cap = []
        self.adjacency = [[] for _ in range(num_nodes)]

    def add_arc(self, u, v, capacity):
        """Add a directed arc u -> v; returns its arc id."""
        if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
            raise FlowNetworkError(f"arc endpoints ({u}, {v}) out of range")
        if capacity < 0.0:
            raise FlowNetworkError("capacity must be non-negative")
        arc_id = len(self.arc_to)
        self.arc_to.append(v)
        self.arc_cap.append(float(capacity))
        self.adjacency[u].append(arc_id)
        # reverse arc for residual flow
        self.arc_to.append(u)
        self.arc_cap.append(0.0)
        self.adjacency[v].append(arc_id + 1)
        return arc_id


def max_flow(network, source, sink):
    """Maximum s-t flow via shortest augmenting paths (BFS).

    The network's stored capacities are not modified; each call works on a
    residual copy.
    """
    if not (0 <= source < network.num_nodes and 0 <= sink < network.num_nodes):
        raise FlowNetworkError("source or sink missing from the network")
    if source == sink:
        raise FlowNetworkError("source and sink must differ")
    residual = list(network.arc_cap)
    arc_to = network.arc_to
    adjacency = network.adjacency
    total = 0.0
    while True:
        parent_arc = [-1] * network.num_nodes
        parent_arc[source] = -2
        queue = deque([source])
        while queue and parent_arc[sink] == -1:
            node = queue.popleft()
            for arc in adjacency[node]:
                head = arc_to[arc]
                if parent_arc[head] == -1 and residual[arc] > 0.0:
                    parent_arc[head] = arc
                    queue.append(head)
        if parent_arc[sink] == -1:
            return total
        bottleneck = math.inf
        node = sink
        while node != source:
            arc = parent_arc[node]
            bottleneck = min(bottleneck, residual[arc])
            node = arc_to[arc ^ 1]
        node = sink
        while node != source:
            arc = parent_arc[node]
            residual[arc] -= bottleneck
            residual[arc ^ 1] += bottleneck
            node = arc_to[arc ^ 1]
        total += bottleneck


@dataclass(frozen=True)
class NccReport:
    """Per-cluster normalized flows and the certification verdict."""

    rho: list
    rho_bar: float
    boundary_size: float
    num_boundary_edges: int
    threshold: float
    satisfied: bool
    K_used: float = None
    L_used: float = None

    def to_dict(self):
        return {
            "rho": [float(r) for r in self.rho],
            "rho_bar": float(self.rho_bar),
            "boundary_size": float(self.boundary_size),
            "num_boundary_edges": int(self.num_boundary_edges),
            "threshold": float(self.threshold),
            "satisfied": bool(self.satisfied),
            "K_used": None if self.K_used is None else float(self.K_used),
            "L_used": None if self.L_used is None else float(self.L_used),
        }


def boundary_edges(graph, partition):
    """Edge positions whose endpoints lie in different clusters."""
    if partition.n != graph.n:
        raise ValueError("partition size does not match the graph")
    if graph.q == 0:
        return np.empty(0, dtype=np.int64)
    mask = (
        partition.assignment[graph.edge_src]
        != partition.assignment[graph.edge_dst]
    )
    return np.nonzero(mask)[0].astype(np.int64)


def normalized_flow(graph, partition, training_set, l):
    """Normalized flow rho_l from labeled nodes of cluster l to its boundary.

    Flow network: super-source -> each labeled node of the cluster with
    capacity equal to the node's weighted degree; intra-cluster edges carry
    their weight in both directions; the cluster-side endpoint of each
    boundary edge drains to the super-sink unrestricted.  The value is
    max-flow divided by the total weight of boundary edges touching the
    cluster; +inf when the cluster has no boundary edges.
    """
    if not 0 <= l < partition.num_clusters:
        raise ValueError(f"no cluster with index {l}")
    members = np.nonzero(partition.assignment == l)[0]
    if members.size == 0:
        raise ValueError(f"cluster {l} is empty")
    training_set = np.asarray(training_set, dtype=np.int64)

    in_cluster = partition.assignment == l
    src_in = in_cluster[graph.edge_src]
    dst_in = in_cluster[graph.edge_dst]
    touching = np.nonzero(src_in != dst_in)[0]
    denom = float(np.sum(graph.edge_weight[touching]))
    if denom == 0.0:
        return math.inf

    labeled = training_set[in_cluster[training_set]]
    if labeled.size == 0:
        return 0.0

    source = graph.n
    sink = graph.n + 1
    net = FlowNetwork(graph.n + 2)
    for i in labeled:
        net.add_arc(source, int(i), float(graph.degrees[i]))
    interior = np.nonzero(src_in & dst_in)[0]
    for e in interior:
        i = int(graph.edge_src[e])
        j = int(graph.edge_dst[e])
        a = float(graph.edge_weight[e])
        net.add_arc(i, j, a)
        net.add_arc(j, i, a)
    for e in touching:
        inside = int(graph.edge_src[e]) if src_in[graph.edge_src[e]] else int(
            graph.edge_dst[e]
        )
        net.add_arc(inside, sink, math.inf)
    return max_flow(net, source, sink) / denom


def check_ncc(graph, partition, training_set, p, K=None):
    """Compute rho for every cluster and the sqrt(p) certification verdict.

    L_used records sqrt(p) * min_l rho_l, the certified connectivity proxy;
    K is not derivable from flows and is echoed into the report when given
    (the penalty-strength rule lam = 1/K).
    """
    if p < 1:
        raise ValueError("p must be positive")
    rho = [
        normalized_flow(graph, partition, training_set, l)
        for l in range(partition.num_clusters)
    ]
    rho_min = min(rho)
    rho_bar = float(np.mean(rho)) if all(math.isfinite(r) for r in rho) else math.inf
    threshold = math.sqrt(p)
    b_ids = boundary_edges(graph, partition)
    boundary_size = float(np.sum(graph.edge_weight[b_ids]))
    return NccReport(
        rho=rho,
        rho_bar=rho_bar,
        boundary_size=boundary_size,
        num_boundary_edges=int(b_ids.size),
        threshold=threshold,
        satisfied=bool(rho_min > threshold),
        K_used=K,
        L_used=threshold * rho_min if math.isfinite(rho_min) else math.inf,
    )


def write_ncc_report_json(path, report):
    """Serialize an NccReport (infinities appear as JSON Infinity tokens)."""
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
