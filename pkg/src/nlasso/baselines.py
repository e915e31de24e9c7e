"""Reference fitters built on plain subgradient descent.

Two uses: ``lad_fit`` is the single-model least-absolute-deviation baseline
reported by the weather experiment, and ``subgradient_reference_solve``
minimizes the full graph-coupled objective directly, without any of the
primal-dual machinery, serving as an independent desk-scale reference for
the main solver.  Both run a diminishing-stepsize subgradient method whose
step is held constant within rounds and decays geometrically between rounds;
on these piecewise-linear(+quadratic-free) objectives the best iterate
reaches deep accuracy with enough rounds.
"""

import numpy as np

from . import _kernels


def _round_len(iters, rounds):
    if iters < 1:
        raise ValueError("iters must be positive")
    if rounds < 1:
        raise ValueError("rounds must be positive")
    return max(1, iters // rounds)


def lad_fit(features, labels, iters=200000, rounds=50, decay=0.7, step0=0.0):
    """Fit one coefficient vector minimizing sum_i |y_i - x_i.v|.

    Returns (coef, objective).  ``step0 <= 0`` picks an automatic initial
    step from the data scale.
    """
    feats = np.ascontiguousarray(np.asarray(features, dtype=np.float64))
    y = np.ascontiguousarray(np.asarray(labels, dtype=np.float64))
    if feats.ndim != 2 or feats.shape[0] != y.shape[0]:
        raise ValueError("features must be (m, p) with one label per row")
    if feats.shape[0] == 0:
        raise ValueError("need at least one observation")
    if not (np.all(np.isfinite(feats)) and np.all(np.isfinite(y))):
        raise ValueError("features and labels must be finite")
    coef, obj = _kernels.lad_subgradient(
        feats, y, int(iters), _round_len(iters, rounds), float(decay), float(step0)
    )
    return np.asarray(coef), float(obj)


def subgradient_reference_solve(
    dataset, lam, iters=1000000, rounds=50, decay=0.7, step0=0.0
):
    """Minimize the graph-coupled objective by plain subgradient descent.

    Intended for small instances as an algorithm-independent reference:
    it evaluates the objective and a subgradient directly from the edge
    list and labeled nodes each iteration and keeps the best iterate.
    Returns (weights, objective).
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    dataset.validate_for_solving()
    g = dataset.graph
    w, obj = _kernels.subgradient_tv_l1(
        g.edge_src,
        g.edge_dst,
        g.edge_weight,
        np.ascontiguousarray(dataset.features),
        np.ascontiguousarray(np.nan_to_num(dataset.labels, nan=0.0)),
        dataset.training_set,
        float(lam),
        int(iters),
        _round_len(iters, rounds),
        float(decay),
        float(step0),
    )
    return np.asarray(w), float(obj)
