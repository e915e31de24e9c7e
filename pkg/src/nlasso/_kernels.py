"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once, at import time.  numba is used when it imports
cleanly, unless the environment variable ``NLASSO_DISABLE_NUMBA`` is set to a
truthy value (anything other than empty / ``0`` / ``false`` / ``no``), in
which case the vectorized numpy implementations are used instead.  Both
implementation sets stay importable (``NUMPY_IMPLS`` / ``NUMBA_IMPLS``) so
they can be benchmarked and cross-checked against each other.

Every kernel works on plain float64 / int64 arrays and touches no global
state, so results are deterministic for a fixed backend.
"""

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    njit = None
    NUMBA_AVAILABLE = False

_DISABLED = os.environ.get("NLASSO_DISABLE_NUMBA", "0").strip().lower() not in (
    "",
    "0",
    "false",
    "no",
)
USE_NUMBA = NUMBA_AVAILABLE and not _DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations (vectorized; also the reference fallback)
# ---------------------------------------------------------------------------


def _numpy_incidence_apply(edge_src, edge_dst, edge_weight, w):
    """Per-edge weighted differences: out[e] = A_e * (w[src_e] - w[dst_e])."""
    return edge_weight[:, None] * (w[edge_src] - w[edge_dst])


def _numpy_incidence_adjoint(edge_src, edge_dst, edge_weight, u, n):
    """Adjoint of the edge-difference map: scatter +A_e*u[e] to src, -A_e*u[e] to dst."""
    out = np.zeros((n, u.shape[1]))
    scaled = edge_weight[:, None] * u
    # np.add.at applies updates in index order, so the result is deterministic
    np.add.at(out, edge_src, scaled)
    np.subtract.at(out, edge_dst, scaled)
    return out


def _numpy_tv_sum(edge_src, edge_dst, edge_weight, w):
    """Sum over edges of A_e * ||w[src_e] - w[dst_e]||_2."""
    diff = w[edge_src] - w[edge_dst]
    return float(np.sum(edge_weight * np.sqrt(np.sum(diff * diff, axis=1))))


def _numpy_clip_rows(u, radius):
    """Project each row of u onto the Euclidean ball of the given radius."""
    norms = np.sqrt(np.sum(u * u, axis=1))
    safe = np.where(norms > 0.0, norms, 1.0)
    scale = np.where(norms >= radius, radius / safe, 1.0)
    return u * scale[:, None]


def _numpy_subgradient_tv_l1(
    edge_src,
    edge_dst,
    edge_weight,
    feats,
    y,
    labeled,
    lam,
    iters,
    round_len,
    decay,
    step0,
):
    """Subgradient descent on sum_i |y_i - x_i.w_i| + lam * sum_e A_e ||w_i - w_j||.

    Steps are constant within rounds of ``round_len`` iterations and shrink by
    ``decay`` between rounds; the best iterate seen is returned.  ``step0 <= 0``
    selects an automatic initial step scaled from the starting point.
    """
    n, p = feats.shape
    w = np.zeros((n, p))
    best_w = w.copy()
    best_f = float(np.sum(np.abs(y[labeled]))) if labeled.size else 0.0

    def eval_and_grad(w):
        g = np.zeros((n, p))
        f = 0.0
        if labeled.size:
            resid = y[labeled] - np.sum(feats[labeled] * w[labeled], axis=1)
            f += float(np.sum(np.abs(resid)))
            np.subtract.at(g, labeled, np.sign(resid)[:, None] * feats[labeled])
        if edge_src.size:
            diff = w[edge_src] - w[edge_dst]
            norms = np.sqrt(np.sum(diff * diff, axis=1))
            f += float(lam * np.sum(edge_weight * norms))
            nz = norms > 0.0
            if np.any(nz):
                coef = (lam * edge_weight[nz] / norms[nz])[:, None] * diff[nz]
                np.add.at(g, edge_src[nz], coef)
                np.subtract.at(g, edge_dst[nz], coef)
        return f, g

    f0, g0 = eval_and_grad(w)
    gn2 = float(np.sum(g0 * g0))
    if step0 <= 0.0:
        step0 = f0 / gn2 if gn2 > 1e-30 else 1.0
    f, g = f0, g0
    for k in range(iters):
        if f < best_f:
            best_f = f
            best_w = w.copy()
        step = step0 * decay ** (k // round_len)
        w = w - step * g
        f, g = eval_and_grad(w)
    if f < best_f:
        best_f = f
        best_w = w.copy()
    return best_w, best_f


def _numpy_lad_subgradient(feats, y, iters, round_len, decay, step0):
    """Subgradient descent on sum_i |y_i - x_i.v| over a single coefficient vector."""
    m, p = feats.shape
    v = np.zeros(p)
    best_v = v.copy()
    best_f = float(np.sum(np.abs(y)))

    def eval_and_grad(v):
        resid = y - feats @ v
        f = float(np.sum(np.abs(resid)))
        g = -(feats.T @ np.sign(resid))
        return f, g

    f0, g0 = eval_and_grad(v)
    gn2 = float(np.sum(g0 * g0))
    if step0 <= 0.0:
        step0 = f0 / gn2 if gn2 > 1e-30 else 1.0
    f, g = f0, g0
    for k in range(iters):
        if f < best_f:
            best_f = f
            best_v = v.copy()
        step = step0 * decay ** (k // round_len)
        v = v - step * g
        f, g = eval_and_grad(v)
    if f < best_f:
        best_f = f
        best_v = v.copy()
    return best_v, best_f


# ---------------------------------------------------------------------------
# loop implementations (sources for numba compilation)
# ---------------------------------------------------------------------------


def _loop_incidence_apply(edge_src, edge_dst, edge_weight, w):
    q = edge_src.shape[0]
    p = w.shape[1]
    out = np.empty((q, p))
    for e in range(q):
        a = edge_weight[e]
        i = edge_src[e]
        j = edge_dst[e]
        for r in range(p):
            out[e, r] = a * (w[i, r] - w[j, r])
    return out


def _loop_incidence_adjoint(edge_src, edge_dst, edge_weight, u, n):
    q = edge_src.shape[0]
    p = u.shape[1]
    out = np.zeros((n, p))
    for e in range(q):
        a = edge_weight[e]
        i = edge_src[e]
        j = edge_dst[e]
        for r in range(p):
            v = a * u[e, r]
            out[i, r] += v
            out[j, r] -= v
    return out


def _loop_tv_sum(edge_src, edge_dst, edge_weight, w):
    q = edge_src.shape[0]
    p = w.shape[1]
    total = 0.0
    for e in range(q):
        i = edge_src[e]
        j = edge_dst[e]
        s = 0.0
        for r in range(p):
            d = w[i, r] - w[j, r]
            s += d * d
        total += edge_weight[e] * np.sqrt(s)
    return total


def _loop_clip_rows(u, radius):
    q = u.shape[0]
    p = u.shape[1]
    out = np.empty((q, p))
    for e in range(q):
        s = 0.0
        for r in range(p):
            s += u[e, r] * u[e, r]
        nrm = np.sqrt(s)
        if nrm >= radius and nrm > 0.0:
            c = radius / nrm
            for r in range(p):
                out[e, r] = c * u[e, r]
        else:
            for r in range(p):
                out[e, r] = u[e, r]
    return out


def _loop_subgradient_tv_l1(
    edge_src,
    edge_dst,
    edge_weight,
    feats,
    y,
    labeled,
    lam,
    iters,
    round_len,
    decay,
    step0,
):
    n, p = feats.shape
    q = edge_src.shape[0]
    m = labeled.shape[0]
    w = np.zeros((n, p))
    g = np.zeros((n, p))
    best_w = np.zeros((n, p))
    best_f = 0.0
    for t in range(m):
        best_f += abs(y[labeled[t]])

    # evaluate objective and a subgradient at the current w
    f = 0.0
    for t in range(m):
        i = labeled[t]
        pred = 0.0
        for r in range(p):
            pred += feats[i, r] * w[i, r]
        resid = y[i] - pred
        f += abs(resid)
        if resid > 0.0:
            for r in range(p):
                g[i, r] -= feats[i, r]
        elif resid < 0.0:
            for r in range(p):
                g[i, r] += feats[i, r]
    # w = 0 has zero edge differences, so no edge terms here
    gn2 = 0.0
    for i in range(n):
        for r in range(p):
            gn2 += g[i, r] * g[i, r]
    if step0 <= 0.0:
        if gn2 > 1e-30:
            step0 = f / gn2
        else:
            step0 = 1.0

    for k in range(iters):
        if f < best_f:
            best_f = f
            for i in range(n):
                for r in range(p):
                    best_w[i, r] = w[i, r]
        step = step0 * decay ** (k // round_len)
        for i in range(n):
            for r in range(p):
                w[i, r] -= step * g[i, r]
                g[i, r] = 0.0
        f = 0.0
        for t in range(m):
            i = labeled[t]
            pred = 0.0
            for r in range(p):
                pred += feats[i, r] * w[i, r]
            resid = y[i] - pred
            f += abs(resid)
            if resid > 0.0:
                for r in range(p):
                    g[i, r] -= feats[i, r]
            elif resid < 0.0:
                for r in range(p):
                    g[i, r] += feats[i, r]
        for e in range(q):
            i = edge_src[e]
            j = edge_dst[e]
            s = 0.0
            for r in range(p):
                d = w[i, r] - w[j, r]
                s += d * d
            nrm = np.sqrt(s)
            f += lam * edge_weight[e] * nrm
            if nrm > 0.0:
                c = lam * edge_weight[e] / nrm
                for r in range(p):
                    d = w[i, r] - w[j, r]
                    g[i, r] += c * d
                    g[j, r] -= c * d
    if f < best_f:
        best_f = f
        for i in range(n):
            for r in range(p):
                best_w[i, r] = w[i, r]
    return best_w, best_f


def _loop_lad_subgradient(feats, y, iters, round_len, decay, step0):
    m, p = feats.shape
    v = np.zeros(p)
    g = np.zeros(p)
    best_v = np.zeros(p)
    best_f = 0.0
    for t in range(m):
        best_f += abs(y[t])

    f = 0.0
    for t in range(m):
        resid = y[t]
        f += abs(resid)
        if resid > 0.0:
            for r in range(p):
                g[r] -= feats[t, r]
        elif resid < 0.0:
            for r in range(p):
                g[r] += feats[t, r]
    gn2 = 0.0
    for r in range(p):
        gn2 += g[r] * g[r]
    if step0 <= 0.0:
        if gn2 > 1e-30:
            step0 = f / gn2
        else:
            step0 = 1.0

    for k in range(iters):
        if f < best_f:
            best_f = f
            for r in range(p):
                best_v[r] = v[r]
        step = step0 * decay ** (k // round_len)
        for r in range(p):
            v[r] -= step * g[r]
            g[r] = 0.0
        f = 0.0
        for t in range(m):
            pred = 0.0
            for r in range(p):
                pred += feats[t, r] * v[r]
            resid = y[t] - pred
            f += abs(resid)
            if resid > 0.0:
                for r in range(p):
                    g[r] -= feats[t, r]
            elif resid < 0.0:
                for r in range(p):
                    g[r] += feats[t, r]
    if f < best_f:
        best_f = f
        for r in range(p):
            best_v[r] = v[r]
    return best_v, best_f


NUMPY_IMPLS = {
    "incidence_apply": _numpy_incidence_apply,
    "incidence_adjoint": _numpy_incidence_adjoint,
    "tv_sum": _numpy_tv_sum,
    "clip_rows": _numpy_clip_rows,
    "subgradient_tv_l1": _numpy_subgradient_tv_l1,
    "lad_subgradient": _numpy_lad_subgradient,
}

if NUMBA_AVAILABLE:
    _jit = njit(cache=True, nogil=True)
    NUMBA_IMPLS = {
        "incidence_apply": _jit(_loop_incidence_apply),
        "incidence_adjoint": _jit(_loop_incidence_adjoint),
        "tv_sum": _jit(_loop_tv_sum),
        "clip_rows": _jit(_loop_clip_rows),
        "subgradient_tv_l1": _jit(_loop_subgradient_tv_l1),
        "lad_subgradient": _jit(_loop_lad_subgradient),
    }
else:  # pragma: no cover - exercised only without numba installed
    NUMBA_IMPLS = {}

_ACTIVE = NUMBA_IMPLS if USE_NUMBA else NUMPY_IMPLS

incidence_apply = _ACTIVE["incidence_apply"]
incidence_adjoint = _ACTIVE["incidence_adjoint"]
tv_sum = _ACTIVE["tv_sum"]
clip_rows = _ACTIVE["clip_rows"]
subgradient_tv_l1 = _ACTIVE["subgradient_tv_l1"]
lad_subgradient = _ACTIVE["lad_subgradient"]
