"""Command-line interface: solve, certify, generate, and run experiments.

Subcommands
-----------
solve               fit per-node weights from a graph CSV + dataset CSV
ncc-check           certify labeled-to-boundary connectivity of a partition
gen-two-cluster     emit a synthetic two-cluster instance as CSV files
knn-graph           build a k-nearest-neighbor graph from coordinates
experiment-fig1     connectivity sweep: NMSE against measured rho-bar
experiment-weather  masked-cluster prediction vs a single-model baseline

Exit codes: 0 success (or certification satisfied), 1 usage error, 2 file
parse error, 3 non-convergence / certification not satisfied, 4 divergence.
All commands are deterministic given their flags; identical invocations
produce byte-identical output files.
"""

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .baselines import lad_fit
from .datagen import (
    TwoClusterSpec,
    load_coords_csv,
    knn_graph,
    synthetic_weather,
    two_cluster_instance,
)
from .graph import EmpiricalGraph, GraphFormatError, load_graph_csv, write_graph_csv
from .model import (
    DatasetFormatError,
    NetworkDataset,
    load_dataset_csv,
    load_network_dataset,
    load_partition_csv,
    nmse,
    predict,
    write_dataset_csv,
    write_partition_csv,
)
from .ncc import check_ncc, write_ncc_report_json
from .solver import (
    DivergenceError,
    SolverConfig,
    solve,
    write_iteration_log,
    write_result_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NOT_SATISFIED = 3
EXIT_DIVERGENCE = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse parser that signals usage errors instead of exiting with 2."""

    def error(self, message):
        raise _UsageError(message)


def _parse_id_list(text):
    """Parse a comma-separated integer list; empty text means empty list."""
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            out.append(int(piece))
        except ValueError:
            raise _UsageError(f"expected comma-separated integers, got {piece!r}")
    return out


def _derive_seed(*parts):
    """Stable per-task seed from integer components."""
    return int(np.random.SeedSequence(tuple(int(v) for v in parts)).generate_state(1)[0])


def _say(args, message):
    if not args.quiet:
        print(message)


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args):
    dataset = load_network_dataset(args.graph, args.dataset)
    lam = args.lam if args.lam is not None else 1.0 / args.lambda_from_K
    config = SolverConfig(
        lam=lam,
        eta=args.eta,
        max_iter=args.max_iter,
        rel_tol=args.rel_tol,
        log_every=args.log_every,
    )
    result = solve(dataset, config)
    write_result_json(args.out, result, config, dataset.graph.node_ids)
    if args.log:
        write_iteration_log(args.log, result)
    final_obj = result.objective_trace[-1][1]
    _say(
        args,
        f"solve: {result.iterations_run} iterations, objective {final_obj:.6g}, "
        f"converged={result.converged}",
    )
    return EXIT_OK if result.converged else EXIT_NOT_SATISFIED


# ---------------------------------------------------------------------------
# ncc-check
# ---------------------------------------------------------------------------


def cmd_ncc_check(args):
    partition, node_ids = load_partition_csv(args.partition)
    graph = load_graph_csv(args.graph, node_ids=node_ids)
    if args.dataset is not None:
        ds_ids, _, labels = load_dataset_csv(args.dataset)
        if ds_ids.shape != node_ids.shape or np.any(ds_ids != node_ids):
            raise DatasetFormatError(
                "dataset node set does not match the partition node set"
            )
        training = np.nonzero(~np.isnan(labels))[0].astype(np.int64)
    else:
        training = np.asarray(
            sorted(graph.index_of(v) for v in _parse_id_list(args.labeled)),
            dtype=np.int64,
        )
    K = args.K
    if K is None and args.lam is not None:
        K = 1.0 / args.lam
    report = check_ncc(graph, partition, training, args.p, K=K)
    write_ncc_report_json(args.out, report)
    _say(
        args,
        f"ncc-check: rho={['%.4g' % r for r in report.rho]}, "
        f"threshold={report.threshold:.4g}, satisfied={report.satisfied}",
    )
    return EXIT_OK if report.satisfied else EXIT_NOT_SATISFIED


# ---------------------------------------------------------------------------
# gen-two-cluster / knn-graph
# ---------------------------------------------------------------------------


def cmd_gen_two_cluster(args):
    spec = TwoClusterSpec(
        n=args.n,
        avg_degree=args.avg_degree,
        inter_edges=args.inter_edges,
        labels_per_cluster=args.labels_per_cluster,
        seed=args.seed,
    )
    dataset, partition, w_true = two_cluster_instance(
        spec, args.p, separation=args.separation
    )
    prefix = args.out_prefix
    write_graph_csv(f"{prefix}.graph.csv", dataset.graph)
    write_dataset_csv(
        f"{prefix}.dataset.csv",
        dataset.graph.node_ids,
        dataset.features,
        dataset.labels,
    )
    write_partition_csv(f"{prefix}.partition.csv", dataset.graph.node_ids, partition)
    with open(f"{prefix}.truth.json", "w") as fh:
        json.dump(
            {
                "node_ids": [int(v) for v in dataset.graph.node_ids],
                "weights": [[float(x) for x in row] for row in w_true],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    _say(
        args,
        f"gen-two-cluster: n={spec.n}, {dataset.graph.q} edges, "
        f"{dataset.num_labeled} labeled nodes -> {prefix}.*",
    )
    return EXIT_OK


def cmd_knn_graph(args):
    node_ids, coords = load_coords_csv(args.coords)
    graph = knn_graph(coords, args.k)
    # knn_graph indexes nodes 0..n-1 in sorted-id order; re-emit original ids
    remapped = EmpiricalGraph(
        node_ids=node_ids,
        edge_src=graph.edge_src,
        edge_dst=graph.edge_dst,
        edge_weight=graph.edge_weight,
        degrees=graph.degrees,
    )
    write_graph_csv(args.out, remapped)
    _say(args, f"knn-graph: {remapped.n} nodes, {remapped.q} edges -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment-fig1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    """One generated instance: measured connectivity and achieved error."""

    inter_edges: int
    run: int
    seed: int
    rho_bar: float
    rho_min: float
    nmse: float
    iterations: int
    objective: float
    lam: float
    converged: bool


def _fig1_single_run(n, p, avg_degree, lpc, inter, separation, lam, max_iter, rel_tol, seed):
    spec = TwoClusterSpec(
        n=n,
        avg_degree=avg_degree,
        inter_edges=inter,
        labels_per_cluster=lpc,
        seed=seed,
    )
    dataset, partition, w_true = two_cluster_instance(spec, p, separation=separation)
    report = check_ncc(
        dataset.graph, partition, dataset.training_set, p, K=1.0 / lam
    )
    config = SolverConfig(
        lam=lam,
        eta=0.9,
        max_iter=max_iter,
        rel_tol=rel_tol,
        log_every=max_iter,
    )
    result = solve(dataset, config)
    return ExperimentRecord(
        inter_edges=inter,
        run=-1,  # filled by the driver
        seed=seed,
        rho_bar=report.rho_bar,
        rho_min=float(min(report.rho)),
        nmse=nmse(w_true, result.weights),
        iterations=result.iterations_run,
        objective=float(result.objective_trace[-1][1]),
        lam=lam,
        converged=result.converged,
    )


def run_fig1_experiment(
    n=80,
    p=2,
    labels_per_cluster=3,
    inter_edges_sweep=(5, 8, 12, 15, 17, 20, 24, 30, 40, 60),
    runs_per_point=10,
    lam=0.1,
    avg_degree=10.0,
    separation=1.0,
    max_iter=3000,
    rel_tol=1e-9,
    base_seed=0,
    threads=1,
):
    """Run the connectivity sweep; returns (records, point_summaries).

    Each sweep point (an inter-cluster edge count) gets ``runs_per_point``
    independently seeded instances.  Per-run seeds derive from
    (base_seed, inter_edges, run), so results do not depend on sweep order
    or thread scheduling.  ``point_summaries`` is a list of dicts sorted by
    mean measured rho_bar, ascending.
    """
    if runs_per_point < 1:
        raise ValueError("runs_per_point must be at least 1")
    sweep = sorted(set(int(v) for v in inter_edges_sweep))
    if not sweep:
        raise ValueError("inter_edges_sweep must be non-empty")

    tasks = [
        (inter, run, _derive_seed(base_seed, inter, run))
        for inter in sweep
        for run in range(runs_per_point)
    ]

    def run_task(task):
        inter, run, seed = task
        rec = _fig1_single_run(
            n,
            p,
            avg_degree,
            labels_per_cluster,
            inter,
            separation,
            lam,
            max_iter,
            rel_tol,
            seed,
        )
        return replace(rec, run=run)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run_task, tasks))
    else:
        records = [run_task(t) for t in tasks]

    by_point = {}
    for rec in records:
        by_point.setdefault(rec.inter_edges, []).append(rec)
    summaries = []
    for inter, recs in by_point.items():
        summaries.append(
            {
                "inter_edges": inter,
                "mean_rho_bar": float(np.mean([r.rho_bar for r in recs])),
                "mean_nmse": float(np.mean([r.nmse for r in recs])),
            }
        )
    summaries.sort(key=lambda s: s["mean_rho_bar"])
    order = {s["inter_edges"]: k for k, s in enumerate(summaries)}
    records.sort(key=lambda r: (order[r.inter_edges], r.run))
    return records, summaries


def cmd_experiment_fig1(args):
    sweep = _parse_id_list(args.inter_edges)
    if not sweep:
        raise _UsageError("--inter-edges must list at least one value")
    records, summaries = run_fig1_experiment(
        n=args.n,
        p=args.p,
        labels_per_cluster=args.labels_per_cluster,
        inter_edges_sweep=sweep,
        runs_per_point=args.runs,
        lam=args.lam,
        avg_degree=args.avg_degree,
        separation=args.separation,
        max_iter=args.max_iter,
        rel_tol=args.rel_tol,
        base_seed=args.seed,
        threads=args.threads,
    )
    import csv as _csv

    summary_by_point = {s["inter_edges"]: s for s in summaries}
    with open(args.out, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(
            [
                "point_mean_rho_bar",
                "point_mean_nmse",
                "inter_edges",
                "run",
                "seed",
                "rho_bar",
                "rho_min",
                "nmse",
                "iterations",
                "objective",
                "lambda",
                "converged",
            ]
        )
        for rec in records:
            s = summary_by_point[rec.inter_edges]
            writer.writerow(
                [
                    repr(float(s["mean_rho_bar"])),
                    repr(float(s["mean_nmse"])),
                    rec.inter_edges,
                    rec.run,
                    rec.seed,
                    repr(float(rec.rho_bar)),
                    repr(float(rec.rho_min)),
                    repr(float(rec.nmse)),
                    rec.iterations,
                    repr(float(rec.objective)),
                    repr(float(rec.lam)),
                    int(rec.converged),
                ]
            )
    if not args.quiet:
        for s in summaries:
            print(
                f"inter_edges={s['inter_edges']:>3d}  "
                f"mean_rho_bar={s['mean_rho_bar']:8.4f}  "
                f"mean_nmse={s['mean_nmse']:.6g}"
            )
        print(f"experiment-fig1: {len(records)} records -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment-weather
# ---------------------------------------------------------------------------


def cmd_experiment_weather(args):
    if args.synthetic:
        dataset = synthetic_weather(
            n_stations=args.stations, days=args.days, seed=args.seed
        )
        if args.cluster is None:
            # southern regime: the first ceil(n/2) station ids
            cluster_ids = list(range((args.stations + 1) // 2))
        else:
            cluster_ids = _parse_id_list(args.cluster)
    else:
        if args.dataset is None or args.graph is None:
            raise _UsageError("need --dataset and --graph unless --synthetic is set")
        dataset = load_network_dataset(args.graph, args.dataset)
        if args.cluster is None:
            raise _UsageError("--cluster is required for file datasets")
        cluster_ids = _parse_id_list(args.cluster)
    if not cluster_ids:
        raise _UsageError("cluster must contain at least one node")

    graph = dataset.graph
    cluster_idx = np.asarray(
        sorted(graph.index_of(v) for v in cluster_ids), dtype=np.int64
    )
    if np.any(np.isnan(dataset.labels[cluster_idx])):
        raise ValueError("every cluster node must carry a label to score against")

    if args.keep is None:
        keep_ids = [int(graph.node_ids[k]) for k in cluster_idx[:3]]
    else:
        keep_ids = _parse_id_list(args.keep)
    keep_idx = np.asarray(
        sorted(graph.index_of(v) for v in keep_ids), dtype=np.int64
    )
    if not set(keep_idx).issubset(set(cluster_idx)):
        raise _UsageError("--keep nodes must lie inside the cluster")
    if keep_idx.size == 0:
        raise _UsageError("need at least one kept labeled node in the cluster")
    masked_idx = np.asarray(
        sorted(set(cluster_idx) - set(keep_idx)), dtype=np.int64
    )
    if masked_idx.size == 0:
        raise _UsageError("no nodes to mask: cluster equals the kept set")

    masked_labels = dataset.labels.copy()
    masked_labels[masked_idx] = np.nan
    masked_ds = NetworkDataset(graph, dataset.features, masked_labels)

    config = SolverConfig(
        lam=args.lam,
        eta=0.9,
        max_iter=args.max_iter,
        rel_tol=args.rel_tol,
        log_every=max(1, args.max_iter // 10),
    )
    result = solve(masked_ds, config)

    actual = dataset.labels[masked_idx]
    fitted = np.asarray(
        [predict(result.weights, masked_ds, int(i)) for i in masked_idx]
    )
    denom = float(np.sum(actual * actual))
    if denom == 0.0:
        raise ValueError("masked labels are all zero; normalized error undefined")
    nlasso_error = float(np.sum((fitted - actual) ** 2)) / denom

    coef, _ = lad_fit(
        dataset.features[keep_idx],
        dataset.labels[keep_idx],
        iters=args.baseline_iters,
    )
    base_pred = dataset.features[masked_idx] @ coef
    baseline_error = float(np.sum((base_pred - actual) ** 2)) / denom
    ratio = nlasso_error / baseline_error if baseline_error > 0.0 else math.inf

    payload = {
        "lambda": float(args.lam),
        "max_iter": int(args.max_iter),
        "iterations_run": int(result.iterations_run),
        "converged": bool(result.converged),
        "cluster": [int(graph.node_ids[k]) for k in cluster_idx],
        "kept": [int(graph.node_ids[k]) for k in keep_idx],
        "masked": [int(graph.node_ids[k]) for k in masked_idx],
        "nlasso_error": nlasso_error,
        "baseline_error": baseline_error,
        "error_ratio": ratio,
        "baseline_coef": [float(v) for v in coef],
        "predictions": {
            "node_ids": [int(graph.node_ids[k]) for k in masked_idx],
            "actual": [float(v) for v in actual],
            "nlasso": [float(v) for v in fitted],
            "baseline": [float(v) for v in base_pred],
        },
    }
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _say(
        args,
        f"experiment-weather: nlasso_error={nlasso_error:.6g}, "
        f"baseline_error={baseline_error:.6g}, ratio={ratio:.3f}",
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base RNG seed")
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads for sweeps"
    )
    common.add_argument(
        "--quiet", action="store_true", help="suppress progress output"
    )

    parser = _Parser(prog="nlasso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ps = sub.add_parser(
        "solve", parents=[common], help="fit per-node weights from CSV inputs"
    )
    ps.add_argument("--graph", required=True, help="edge-list CSV (i,j,weight)")
    ps.add_argument(
        "--dataset", required=True, help="node-table CSV (node,x1..xp,y; empty y = unlabeled)"
    )
    lam_group = ps.add_mutually_exclusive_group(required=True)
    lam_group.add_argument(
        "--lam", type=float, default=None, help="penalty strength"
    )
    lam_group.add_argument(
        "--lambda-from-K",
        dest="lambda_from_K",
        type=float,
        default=None,
        help="set the penalty to 1/K",
    )
    ps.add_argument("--eta", type=float, default=0.9, help="step-size scale in (0,1)")
    ps.add_argument("--max-iter", type=int, default=10000)
    ps.add_argument(
        "--rel-tol",
        type=float,
        default=1e-6,
        help="relative primal-change stopping threshold (0 disables)",
    )
    ps.add_argument("--log-every", type=int, default=100)
    ps.add_argument("--out", required=True, help="result JSON path")
    ps.add_argument("--log", default=None, help="iteration-log CSV path")
    ps.set_defaults(func=cmd_solve)

    pn = sub.add_parser(
        "ncc-check", parents=[common], help="certify cluster connectivity via flows"
    )
    pn.add_argument("--graph", required=True)
    pn.add_argument("--partition", required=True, help="CSV (node,cluster_id)")
    src = pn.add_mutually_exclusive_group(required=True)
    src.add_argument(
        "--dataset", default=None, help="take labeled nodes from this dataset CSV"
    )
    src.add_argument(
        "--labeled",
        default=None,
        help="comma-separated labeled node ids (may be empty)",
    )
    pn.add_argument("--p", type=int, required=True, help="feature dimension")
    pn.add_argument("--K", type=float, default=None, help="record this K in the report")
    pn.add_argument(
        "--lam", type=float, default=None, help="record K = 1/lam in the report"
    )
    pn.add_argument("--out", required=True, help="report JSON path")
    pn.set_defaults(func=cmd_ncc_check)

    pg = sub.add_parser(
        "gen-two-cluster", parents=[common], help="emit a synthetic two-cluster instance"
    )
    pg.add_argument("--n", type=int, default=80)
    pg.add_argument("--avg-degree", type=float, default=10.0)
    pg.add_argument("--inter-edges", type=int, default=5)
    pg.add_argument("--labels-per-cluster", type=int, default=3)
    pg.add_argument("--p", type=int, default=2)
    pg.add_argument("--separation", type=float, default=1.0)
    pg.add_argument("--out-prefix", required=True)
    pg.set_defaults(func=cmd_gen_two_cluster)

    pk = sub.add_parser(
        "knn-graph", parents=[common], help="build a k-NN graph from coordinates"
    )
    pk.add_argument("--coords", required=True, help="CSV (node,c1..cd)")
    pk.add_argument("--k", type=int, required=True)
    pk.add_argument("--out", required=True, help="graph CSV path")
    pk.set_defaults(func=cmd_knn_graph)

    pf = sub.add_parser(
        "experiment-fig1",
        parents=[common],
        help="NMSE vs connectivity sweep on two-cluster instances",
    )
    pf.add_argument("--n", type=int, default=80)
    pf.add_argument("--p", type=int, default=2)
    pf.add_argument("--labels-per-cluster", type=int, default=3)
    pf.add_argument(
        "--inter-edges",
        default="5,8,12,15,17,20,24,30,40,60",
        help="comma-separated sweep of inter-cluster edge counts",
    )
    pf.add_argument("--runs", type=int, default=10, help="instances per sweep point")
    pf.add_argument("--lam", type=float, default=0.1)
    pf.add_argument("--avg-degree", type=float, default=10.0)
    pf.add_argument("--separation", type=float, default=1.0)
    pf.add_argument("--max-iter", type=int, default=3000)
    pf.add_argument("--rel-tol", type=float, default=1e-9)
    pf.add_argument("--out", required=True, help="records CSV path")
    pf.set_defaults(func=cmd_experiment_fig1)

    pw = sub.add_parser(
        "experiment-weather",
        parents=[common],
        help="masked-cluster prediction vs single-model baseline",
    )
    pw.add_argument(
        "--synthetic", action="store_true", help="use the bundled generator"
    )
    pw.add_argument("--stations", type=int, default=30)
    pw.add_argument("--days", type=int, default=30)
    pw.add_argument("--dataset", default=None, help="node-table CSV (file mode)")
    pw.add_argument("--graph", default=None, help="edge-list CSV (file mode)")
    pw.add_argument(
        "--cluster",
        default=None,
        help="comma-separated node ids to mask (default for --synthetic: southern regime)",
    )
    pw.add_argument(
        "--keep",
        default=None,
        help="cluster nodes that keep labels (default: first 3 of the cluster)",
    )
    pw.add_argument("--lam", type=float, default=1.0 / 7.0)
    pw.add_argument("--max-iter", type=int, default=10000)
    pw.add_argument("--rel-tol", type=float, default=0.0)
    pw.add_argument("--baseline-iters", type=int, default=200000)
    pw.add_argument("--out", required=True, help="result JSON path")
    pw.set_defaults(func=cmd_experiment_weather)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, DatasetFormatError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
