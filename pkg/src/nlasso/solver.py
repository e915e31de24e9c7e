"""Preconditioned primal-dual solver for graph-coupled absolute-loss regression.

The problem: minimize over per-node weight vectors w (an (n, p) matrix)

    sum_{i labeled} |y_i - x_i . w_i|  +  lam * sum_edges A_e ||w_i - w_j||_2.

Both terms are nonsmooth, so the solver alternates a proximal primal step with
a projected dual ascent step on the edge variables, using diagonal step sizes
derived from the graph: sigma_e = 1/(2 A_e) on edge e and tau_i = eta/d_i on
node i with weighted degree d_i.  For eta < 1 the combined diagonally scaled
edge-difference operator has squared norm below 1 (checkable numerically with
``estimate_operator_norm``), which is the standard step-size condition for
convergence of this scheme.

Iterations cost O(q p + n p): two passes of the edge-difference operator, a
closed-form prox at labeled nodes, and a per-edge ball projection.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import apply_incidence, apply_incidence_adjoint, total_variation


class DivergenceError(RuntimeError):
    """The iteration produced non-finite values."""


@dataclass(frozen=True)
class Preconditioners:
    """Diagonal step sizes: sigma (one per edge) and tau (one per node)."""

    sigma: np.ndarray
    tau: np.ndarray
    eta: float = 0.9

    @staticmethod
    def from_graph(graph, eta=0.9):
        """sigma_e = 1/(2 A_e); tau_i = eta/d_i, or 1.0 at isolated nodes.

        Requires 0 < eta < 1.  Isolated nodes take no part in any edge term,
        so any positive primal step works there; 1.0 keeps their updates
        plainly scaled.
        """
        if not 0.0 < eta < 1.0:
            raise ValueError("eta must lie strictly between 0 and 1")
        sigma = 1.0 / (2.0 * graph.edge_weight)
        deg = graph.degrees
        tau = np.where(deg > 0.0, eta / np.where(deg > 0.0, deg, 1.0), 1.0)
        return Preconditioners(sigma=sigma, tau=tau, eta=eta)


@dataclass(frozen=True)
class SolverConfig:
    """Solve parameters.

    rel_tol is the threshold on the relative primal change
    ||w_{k+1} - w_k|| / (1 + ||w_k||); convergence is declared after 10
    consecutive iterations below it.  rel_tol = 0 disables early stopping.
    log_every controls how often trace points are recorded (the final
    iteration is always recorded).
    """

    lam: float
    eta: float = 0.9
    max_iter: int = 10000
    rel_tol: float = 0.0
    log_every: int = 100

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError("lam must be positive")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly between 0 and 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.rel_tol < 0.0:
            raise ValueError("rel_tol must be non-negative")
        if self.log_every < 1:
            raise ValueError("log_every must be at least 1")


@dataclass
class SolverResult:
    """Solver output: final iterates plus iteration traces.

    Trace entries are (iteration, value) pairs recorded every ``log_every``
    iterations and at the final iteration.
    """

    weights: np.ndarray
    dual: np.ndarray
    iterations_run: int
    converged: bool
    objective_trace: list = field(default_factory=list)
    primal_change_trace: list = field(default_factory=list)
    dual_max_trace: list = field(default_factory=list)


def soft_threshold(x, t):
    """Shrink toward zero by t: sign(x) * max(|x| - t, 0); works elementwise."""
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def clip(x, radius):
    """Project a vector onto the Euclidean ball of the given radius."""
    x = np.asarray(x, dtype=np.float64)
    nrm = float(np.sqrt(np.sum(x * x)))
    if nrm >= radius and nrm > 0.0:
        return (radius / nrm) * x
    return x.copy()


def labeled_node_update(w_inter, x, y, tau):
    """Proximal update at one labeled node.

    Returns argmin_v |y - x.v| + ||v - w_inter||^2 / (2 tau), which moves
    w_inter along x just far enough: the full projection onto the fit
    hyperplane when the residual is small, a fixed-length step otherwise.
    The component of w_inter orthogonal to x is untouched.
    """
    w_inter = np.asarray(w_inter, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if not np.any(x != 0.0):
        raise ValueError("feature vector must be nonzero")
    return _prox_rows(
        w_inter[None, :],
        x[None, :],
        np.asarray([y], dtype=np.float64),
        np.asarray([tau], dtype=np.float64),
    )[0]


def _prox_rows(w_rows, x_rows, y, tau):
    """Vectorized absolute-loss prox across rows.

    With r = y - x.w and n2 = ||x||^2, the minimizer is
    w + x * sign(r) * min(|r|/n2, tau), expressed below through a soft
    threshold on the normalized residual so both branches share one formula.
    """
    n2 = np.sum(x_rows * x_rows, axis=1)
    y_t = y / n2
    w_t = np.sum(x_rows * w_rows, axis=1) / n2
    shift = y_t + soft_threshold(w_t - y_t, tau) - w_t
    return w_rows + x_rows * shift[:, None]


def primal_step(graph, pre, w, u, dataset):
    """One primal update: gradient-like step through the adjoint, then the
    labeled-node prox applied in place of the plain step at labeled nodes."""
    adj = apply_incidence_adjoint(graph, u)
    w_next = w - pre.tau[:, None] * adj
    m = dataset.training_set
    if m.size:
        w_next[m] = _prox_rows(
            w_next[m], dataset.features[m], dataset.labels[m], pre.tau[m]
        )
    return w_next


def dual_step(graph, pre, u, w_next, w, lam):
    """One dual update: ascent on the reflected primal point, then per-edge
    projection onto the lam-ball."""
    z = 2.0 * w_next - w
    u_bar = u + pre.sigma[:, None] * apply_incidence(graph, z)
    return _kernels.clip_rows(np.ascontiguousarray(u_bar), lam)


def objective(w, dataset, lam):
    """Training error plus lam times total variation."""
    from .model import training_error

    return training_error(w, dataset) + lam * total_variation(dataset.graph, w)


def estimate_operator_norm(graph, pre, p=1, iters=60, seed=0):
    """Power-iteration estimate of the squared norm of the scaled operator.

    The operator is S^(1/2) D T^(1/2) with S = diag(sigma) per edge block,
    T = diag(tau) per node block and D the edge-difference map; the scheme's
    step-size condition is that this squared norm stays below 1.  Estimates
    are Rayleigh quotients of the symmetrized map, so they are non-decreasing
    in ``iters`` and approach the true value from below.  The operator acts
    identically on each of the p columns, so the estimate is computed on the
    requested block width only for interface uniformity.
    """
    if graph.q == 0:
        return 0.0
    if p < 1:
        raise ValueError("p must be positive")
    rng = np.random.default_rng(seed)
    sqrt_tau = np.sqrt(pre.tau)
    v = rng.standard_normal((graph.n, p))
    nrm = float(np.sqrt(np.sum(v * v)))
    if nrm == 0.0:
        return 0.0
    v /= nrm
    rayleigh = 0.0
    for _ in range(iters):
        z = apply_incidence(graph, sqrt_tau[:, None] * v)
        bv = sqrt_tau[:, None] * apply_incidence_adjoint(
            graph, pre.sigma[:, None] * z
        )
        rayleigh = float(np.sum(v * bv))
        nrm = float(np.sqrt(np.sum(bv * bv)))
        if nrm == 0.0:
            return 0.0
        v = bv / nrm
    return rayleigh


def solve(dataset, config):
    """Run the primal-dual iteration from zero initial weights and duals.

    Stops early when the relative primal change stays below
    ``config.rel_tol`` for 10 consecutive iterations; raises DivergenceError
    if non-finite values appear.
    """
    dataset.validate_for_solving()
    graph = dataset.graph
    pre = Preconditioners.from_graph(graph, config.eta)
    n, p = graph.n, dataset.p
    w = np.zeros((n, p))
    u = np.zeros((graph.q, p))

    obj_trace = []
    chg_trace = []
    dmax_trace = []

    def record(it, w, u, change):
        obj_trace.append((it, objective(w, dataset, config.lam)))
        chg_trace.append((it, change))
        if u.shape[0]:
            dmax = float(np.sqrt(np.max(np.sum(u * u, axis=1))))
        else:
            dmax = 0.0
        dmax_trace.append((it, dmax))

    converged = False
    streak = 0
    it = 0
    for k in range(config.max_iter):
        it = k + 1
        w_next = primal_step(graph, pre, w, u, dataset)
        u = dual_step(graph, pre, u, w_next, w, config.lam)
        if not (np.all(np.isfinite(w_next)) and np.all(np.isfinite(u))):
            raise DivergenceError(f"non-finite iterate at iteration {it}")
        denom = 1.0 + float(np.sqrt(np.sum(w * w)))
        diff = w_next - w
        change = float(np.sqrt(np.sum(diff * diff))) / denom
        w = w_next
        last = it == config.max_iter
        if config.rel_tol > 0.0 and change < config.rel_tol:
            streak += 1
        else:
            streak = 0
        if streak >= 10:
            converged = True
            record(it, w, u, change)
            break
        if it % config.log_every == 0 or last:
            record(it, w, u, change)

    return SolverResult(
        weights=w,
        dual=u,
        iterations_run=it,
        converged=converged,
        objective_trace=obj_trace,
        primal_change_trace=chg_trace,
        dual_max_trace=dmax_trace,
    )


# ---------------------------------------------------------------------------
# result serialization
# ---------------------------------------------------------------------------


def write_iteration_log(path, result):
    """Write the iteration trace CSV: iter,objective,primal_change,dual_max_norm."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "objective", "primal_change", "dual_max_norm"])
        for (it, obj), (_, chg), (_, dmax) in zip(
            result.objective_trace, result.primal_change_trace, result.dual_max_trace
        ):
            writer.writerow([it, repr(float(obj)), repr(float(chg)), repr(float(dmax))])


def result_to_dict(result, config, node_ids):
    """JSON-ready dict: config echo, convergence info, final objective, weights."""
    final_obj = result.objective_trace[-1][1] if result.objective_trace else None
    return {
        "config": {
            "lambda": float(config.lam),
            "eta": float(config.eta),
            "max_iter": int(config.max_iter),
            "rel_tol": float(config.rel_tol),
            "log_every": int(config.log_every),
        },
        "converged": bool(result.converged),
        "iterations_run": int(result.iterations_run),
        "objective": None if final_obj is None else float(final_obj),
        "node_ids": [int(v) for v in node_ids],
        "weights": [[float(x) for x in row] for row in result.weights],
    }


def write_result_json(path, result, config, node_ids):
    """Serialize the solve outcome; weights are listed in node-id order."""
    with open(path, "w") as fh:
        json.dump(result_to_dict(result, config, node_ids), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_result_json(path):
    """Load a result JSON back into a dict with numpy arrays for the weights."""
    with open(path) as fh:
        data = json.load(fh)
    data["node_ids"] = np.asarray(data["node_ids"], dtype=np.int64)
    data["weights"] = np.asarray(data["weights"], dtype=np.float64)
    return data
