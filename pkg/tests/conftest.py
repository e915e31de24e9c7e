"""Shared instance builders for the test suite.

Everything is driven by a caller-supplied numpy Generator so every test is
deterministic and independently seeded.
"""

import numpy as np

from nlasso import NetworkDataset, from_edge_list


def random_connected_graph(rng, n, extra_prob=0.3, w_lo=0.3, w_hi=2.0):
    """Random connected graph: a random spanning tree plus extra edges."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_prob:
                edges.add((i, j))
    triples = [
        (i, j, float(rng.uniform(w_lo, w_hi))) for (i, j) in sorted(edges)
    ]
    return from_edge_list(triples, node_ids=range(n))


def random_graph(rng, n, edge_prob=0.4, w_lo=0.3, w_hi=2.0):
    """Random graph (possibly disconnected, possibly empty edge set)."""
    triples = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                triples.append((i, j, float(rng.uniform(w_lo, w_hi))))
    return from_edge_list(triples, node_ids=range(n))


def tiny_labeled_instance(rng, n_max=5, p=1):
    """Small connected dataset with >= 2 labeled nodes and nonzero features.

    With at least two labeled nodes per (connected) graph and continuous
    label noise, the optimum objective is almost surely nonzero, which keeps
    relative comparisons meaningful.
    """
    n = int(rng.integers(2, n_max + 1))
    graph = random_connected_graph(rng, n)
    feats = rng.normal(0.0, 1.0, (n, p))
    while np.any(np.sqrt(np.sum(feats * feats, axis=1)) < 0.1):
        feats = rng.normal(0.0, 1.0, (n, p))
    m = int(rng.integers(2, n + 1))
    labeled = rng.choice(n, size=m, replace=False)
    labels = np.full(n, np.nan)
    labels[labeled] = rng.normal(0.0, 2.0, m)
    lam = float(rng.uniform(0.2, 1.5))
    return NetworkDataset(graph, feats, labels), lam


def brute_force_min_cut(net, source, sink):
    """Minimum s-t cut of a FlowNetwork by enumerating source-side subsets."""
    import itertools
    import math

    others = [v for v in range(net.num_nodes) if v not in (source, sink)]
    best = math.inf
    forward = range(0, len(net.arc_to), 2)
    tails = {arc: net.arc_to[arc + 1] for arc in forward}
    for r in range(len(others) + 1):
        for chosen in itertools.combinations(others, r):
            side = {source, *chosen}
            cut = 0.0
            for arc in forward:
                if tails[arc] in side and net.arc_to[arc] not in side:
                    cut += net.arc_cap[arc]
            best = min(best, cut)
    return best
