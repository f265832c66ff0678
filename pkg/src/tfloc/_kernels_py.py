"""Pure-NumPy implementations of the hot kernels.

These are the reference semantics for ``tfloc._native`` (the Cython build
of the same routines). Signatures and behavior are kept identical so the
two backends are interchangeable; see ``benchmarks/bench_backends.py`` for
a speed comparison.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def _column_root(p, weights, b):
    """Solve ``sum_t weights_t * p_t * exp(weights_t * lam) = b`` for ``lam``.

    This is the exact I-projection multiplier of one column onto its
    weighted-mean constraint: entry t gets scaled by ``exp(weights_t * lam)``,
    so unattended frames (weight 0) are left untouched. The left side is
    increasing and convex in ``lam``; an expanding bracket plus bisection is
    robust for any weight profile.
    """
    pos = weights > 0.0
    w_pos = weights[pos]
    ws = float(w_pos @ p[pos])
    w_min = float(w_pos.min())
    w_max = float(w_pos.max())
    if w_min == w_max:
        # uniform positive weights: the projection is a plain column scale
        return float(np.log(b / ws) / w_max)
    wp = weights * p

    def f(lam):
        with np.errstate(over="ignore", under="ignore"):
            return float(wp @ np.exp(weights * lam)) - b

    # exact bracket: bounding each exponential by the extreme weights gives
    # log(b/ws)/w_max <= root <= log(b/ws)/w_min (order flips for b < ws)
    L = float(np.log(b / ws))
    lo = min(L / w_max, L / w_min)
    hi = max(L / w_max, L / w_min)
    if lo == hi:
        return lo
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ips_iterate(Q, attention, target, tol, max_iter, eps):
    """Alternating Bregman projections of ``Q`` onto the constraint families.

    ``Q`` is a (T, M) row-stochastic matrix modified in place. Each pass
    projects onto the weighted-column constraints (every violating column
    c >= 1 is scaled entrywise by ``exp(weights_t * lam_c)`` so that
    (1/T) * sum_t A_t * Q[t, c] hits ``target[c]``), then onto the row
    simplices by renormalization. Convergence is checked before scaling, so
    an already-feasible input is returned untouched. Columns whose target is
    below ``eps`` are floored at ``eps`` instead of scaled; columns with no
    attended mass are skipped (the constraint is unreachable).

    Returns ``(iterations, converged)``.
    """
    T, M = Q.shape
    weights = attention / T
    converged = False
    iterations = 0
    stall_ref = np.inf
    for it in range(max_iter):
        col = weights @ Q
        viol = np.abs(col[1:] - target[1:])
        if viol.size == 0 or viol.max() <= tol:
            converged = True
            break
        # boundary targets contract geometrically with ratio ~1; give up
        # once 100 passes improve the violation by less than half a percent
        if it % 100 == 0:
            if viol.max() > 0.995 * stall_ref:
                break
            stall_ref = viol.max()
        progress = False
        for c in range(1, M):
            if viol[c - 1] <= tol:
                continue
            if target[c] < eps:
                Q[:, c] = eps
                progress = True
            elif col[c] > eps:
                lam = _column_root(Q[:, c], weights, target[c])
                with np.errstate(over="ignore", under="ignore"):
                    Q[:, c] *= np.exp(weights * lam)
                progress = True
        if not progress:
            break
        rows = Q.sum(axis=1)
        np.maximum(rows, eps, out=rows)
        Q /= rows[:, None]
        iterations += 1
    return iterations, converged


def ips_stats(Q, attention, target):
    """Final constraint diagnostics: (max column violation, max row deviation)."""
    T = Q.shape[0]
    col = (attention / T) @ Q
    viol = np.abs(col[1:] - target[1:])
    col_viol = float(viol.max()) if viol.size else 0.0
    row_dev = float(np.max(np.abs(Q.sum(axis=1) - 1.0)))
    return col_viol, row_dev


def diffuse_power(R, w0, beta, iters):
    """Run ``w <- beta * R @ w + (1 - beta) * w0`` for ``iters`` steps."""
    w = w0.copy()
    for _ in range(iters):
        w = beta * (R @ w) + (1.0 - beta) * w0
    return w


def fuse_wavelets(starts, ends, channels, weights, T, m):
    """Accumulate weighted Ricker wavelets onto a (T, m) timeline.

    Each segment i contributes ``weights[i] * ricker(t + 0.5)`` to channel
    ``channels[i] - 1``, sampled at frame centers. The wavelet is centered
    at the segment midpoint with sigma equal to half the segment length.
    """
    phi = np.zeros((T, m))
    centers = np.arange(T, dtype=np.float64) + 0.5
    for s, e, ch, w in zip(starts, ends, channels, weights):
        sigma = 0.5 * (e - s)
        mid = 0.5 * (e + s)
        amp = 2.0 / (np.sqrt(3.0 * sigma) * np.pi ** 0.25)
        x = (centers - mid) / sigma
        phi[:, int(ch) - 1] += w * amp * (1.0 - x * x) * np.exp(-0.5 * x * x)
    return phi


def threshold_runs(x, thr, min_len):
    """Maximal runs of ``x > thr`` with length >= min_len.

    Returns ``(starts, ends)`` as int64 arrays of half-open bounds.
    """
    mask = x > thr
    if not mask.any():
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    edges = np.diff(np.concatenate(([False], mask, [False])).astype(np.int8))
    starts = np.flatnonzero(edges == 1).astype(np.int64)
    ends = np.flatnonzero(edges == -1).astype(np.int64)
    keep = (ends - starts) >= min_len
    return starts[keep], ends[keep]


def _interval_iou(s0, e0, s1, e1):
    inter = np.minimum(e0, e1) - np.maximum(s0, s1)
    inter = np.maximum(inter, 0.0)
    union = (e0 - s0) + (e1 - s1) - inter
    return inter / union


def soft_nms_order(starts, ends, scores, attrs, sigma, floor, max_keep):
    """Greedy Gaussian soft-NMS over scored segments.

    Repeatedly selects the highest-scored surviving segment (ties broken by
    ascending start, end, attribute), decays every other survivor's score by
    ``exp(-iou^2 / sigma)``, and drops survivors below ``floor``. Stops after
    ``max_keep`` selections.

    Returns ``(keep_indices, kept_scores)`` in selection order.
    """
    K = starts.size
    alive = np.ones(K, dtype=bool)
    cur = scores.astype(np.float64).copy()
    keep: list[int] = []
    kept_scores: list[float] = []
    while len(keep) < max_keep:
        cand = np.flatnonzero(alive)
        if cand.size == 0:
            break
        best = min(cand, key=lambda i: (-cur[i], starts[i], ends[i], attrs[i]))
        keep.append(int(best))
        kept_scores.append(float(cur[best]))
        alive[best] = False
        rest = np.flatnonzero(alive)
        if rest.size == 0:
            break
        iou = _interval_iou(starts[best], ends[best], starts[rest], ends[rest])
        cur[rest] *= np.exp(-(iou * iou) / sigma)
        alive[rest[cur[rest] < floor]] = False
    return np.asarray(keep, dtype=np.int64), np.asarray(kept_scores, dtype=np.float64)
