"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs every paired kernel on realistic two-cluster workloads and prints the
median per-call time for each backend plus the speedup.  The numba variants
get one untimed warm-up call so JIT compilation never lands in the numbers.

    python3 benchmarks/bench_kernels.py --sizes 200,2000,20000 --runs 30
"""

import argparse
import time

import numpy as np

from nlasso import TwoClusterSpec, two_cluster_instance
from nlasso._kernels import NUMBA_IMPLS, NUMPY_IMPLS


def _median_time(fun, args, runs):
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        fun(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def _workload(n, p=2, seed=0):
    half_cap = n // 2 - 1
    spec = TwoClusterSpec(
        n=n,
        avg_degree=min(10.0, float(half_cap)),
        inter_edges=min(5, half_cap),
        labels_per_cluster=3,
        seed=seed,
    )
    dataset, _, _ = two_cluster_instance(spec, p)
    g = dataset.graph
    rng = np.random.default_rng(seed + 1)
    w = rng.normal(0.0, 1.0, (g.n, p))
    u = rng.normal(0.0, 1.0, (g.q, p))
    return dataset, g, np.ascontiguousarray(w), np.ascontiguousarray(u)


def bench_size(n, runs):
    dataset, g, w, u = _workload(n)
    feats = np.ascontiguousarray(dataset.features)
    labels = np.ascontiguousarray(np.nan_to_num(dataset.labels, nan=0.0))
    training = dataset.training_set
    sub_iters = 2000
    cases = {
        "incidence_apply": (g.edge_src, g.edge_dst, g.edge_weight, w),
        "incidence_adjoint": (g.edge_src, g.edge_dst, g.edge_weight, u, g.n),
        "tv_sum": (g.edge_src, g.edge_dst, g.edge_weight, w),
        "clip_rows": (u, 0.5),
        "subgradient_tv_l1": (
            g.edge_src, g.edge_dst, g.edge_weight, feats, labels,
            training, 0.1, sub_iters, 100, 0.7, 0.0,
        ),
        "lad_subgradient": (feats[training], labels[training], sub_iters, 100, 0.7, 0.0),
    }

    print(f"\nn = {g.n} nodes, q = {g.q} edges, p = {w.shape[1]} "
          f"(subgradient kernels: {sub_iters} iterations)")
    print(f"{'kernel':<20} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, args in cases.items():
        t_np = _median_time(NUMPY_IMPLS[name], args, runs)
        if NUMBA_IMPLS:
            NUMBA_IMPLS[name](*args)  # warm-up: JIT compile outside timing
            t_nb = _median_time(NUMBA_IMPLS[name], args, runs)
            print(f"{name:<20} {t_np * 1e3:>10.3f}ms {t_nb * 1e3:>10.3f}ms "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<20} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>9}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,2000,20000",
                        help="comma-separated node counts")
    parser.add_argument("--runs", type=int, default=30,
                        help="timed repetitions per kernel (median reported)")
    args = parser.parse_args()

    if not NUMBA_IMPLS:
        print("numba unavailable: timing the numpy fallback only")
    for size in args.sizes.split(","):
        bench_size(int(size), args.runs)


if __name__ == "__main__":
    main()
