"""nlasso: localized linear regression on graphs.

Each node of a weighted graph carries its own linear model; models are
coupled by a total-variation penalty on edge-wise weight differences, so
labels propagate from a few labeled nodes across well-connected regions.
The solver is a diagonally preconditioned primal-dual method; cluster
structure can be certified in advance by max-flow connectivity scores.

Hot kernels run through numba when available; set NLASSO_DISABLE_NUMBA=1
before import to force the pure-numpy fallback.
"""

from ._kernels import BACKEND, NUMBA_AVAILABLE, USE_NUMBA
from .baselines import lad_fit, subgradient_reference_solve
from .datagen import (
    TwoClusterSpec,
    knn_graph,
    load_coords_csv,
    synthetic_weather,
    two_cluster_instance,
    write_coords_csv,
)
from .graph import (
    EmpiricalGraph,
    GraphFormatError,
    apply_incidence,
    apply_incidence_adjoint,
    from_edge_list,
    load_graph_csv,
    total_variation,
    tv_on_edge_subset,
    write_graph_csv,
)
from .model import (
    DatasetFormatError,
    NetworkDataset,
    NoiseSpec,
    Partition,
    generate_labels,
    load_dataset_csv,
    load_network_dataset,
    load_partition_csv,
    nmse,
    partition_from_clusters,
    piecewise_signal,
    predict,
    theorem2_bound,
    training_error,
    write_dataset_csv,
    write_partition_csv,
)
from .ncc import (
    FlowNetwork,
    FlowNetworkError,
    NccReport,
    boundary_edges,
    check_ncc,
    max_flow,
    normalized_flow,
    write_ncc_report_json,
)
from .solver import (
    DivergenceError,
    Preconditioners,
    SolverConfig,
    SolverResult,
    clip,
    dual_step,
    estimate_operator_norm,
    labeled_node_update,
    load_result_json,
    objective,
    primal_step,
    soft_threshold,
    solve,
    write_iteration_log,
    write_result_json,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "USE_NUMBA",
    "DatasetFormatError",
    "DivergenceError",
    "EmpiricalGraph",
    "FlowNetwork",
    "FlowNetworkError",
    "GraphFormatError",
    "NccReport",
    "NetworkDataset",
    "NoiseSpec",
    "Partition",
    "Preconditioners",
    "SolverConfig",
    "SolverResult",
    "TwoClusterSpec",
    "apply_incidence",
    "apply_incidence_adjoint",
    "boundary_edges",
    "check_ncc",
    "clip",
    "dual_step",
    "estimate_operator_norm",
    "from_edge_list",
    "generate_labels",
    "knn_graph",
    "labeled_node_update",
    "lad_fit",
    "load_coords_csv",
    "load_dataset_csv",
    "load_graph_csv",
    "load_network_dataset",
    "load_partition_csv",
    "load_result_json",
    "max_flow",
    "nmse",
    "normalized_flow",
    "objective",
    "partition_from_clusters",
    "piecewise_signal",
    "predict",
    "primal_step",
    "soft_threshold",
    "solve",
    "subgradient_reference_solve",
    "synthetic_weather",
    "theorem2_bound",
    "total_variation",
    "training_error",
    "tv_on_edge_subset",
    "two_cluster_instance",
    "write_coords_csv",
    "write_dataset_csv",
    "write_graph_csv",
    "write_iteration_log",
    "write_ncc_report_json",
    "write_partition_csv",
    "write_result_json",
    "__version__",
]
