# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Mirrors ``tfloc._kernels_py`` exactly; see that module for the semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, exp, fabs, log, sqrt

cnp.import_array()

BACKEND_NAME = "c"

cdef double PI_QUARTER = 3.141592653589793 ** 0.25


cdef double _col_f(double[:, ::1] Q, const double[::1] weights,
                   Py_ssize_t c, double lam, double b) noexcept:
    cdef Py_ssize_t t
    cdef double acc = 0.0
    for t in range(Q.shape[0]):
        if weights[t] > 0.0:
            acc += weights[t] * Q[t, c] * exp(weights[t] * lam)
    return acc - b


cdef double _column_root(double[:, ::1] Q, const double[::1] weights,
                         Py_ssize_t c, double b) noexcept:
    # Exact I-projection multiplier: increasing convex 1-D root problem.
    # Bounding each exponential by the extreme weights brackets the root in
    # [log(b/ws)/w_max, log(b/ws)/w_min] (order flips for b < ws); uniform
    # positive weights (e.g. binary attention) reduce to a plain scale.
    cdef double lo, hi, mid, L, tmp
    cdef double w_min = 1e300, w_max = 0.0, ws = 0.0
    cdef Py_ssize_t t
    cdef int i
    for t in range(Q.shape[0]):
        if weights[t] > 0.0:
            if weights[t] < w_min:
                w_min = weights[t]
            if weights[t] > w_max:
                w_max = weights[t]
            ws += weights[t] * Q[t, c]
    if w_min == w_max:
        return log(b / ws) / w_max
    L = log(b / ws)
    lo = L / w_max
    hi = L / w_min
    if hi < lo:
        tmp = lo
        lo = hi
        hi = tmp
    if lo == hi:
        return lo
    for i in range(200):
        if hi - lo <= 1e-15 * max(1.0, max(fabs(lo), fabs(hi))):
            break
        mid = 0.5 * (lo + hi)
        if _col_f(Q, weights, c, mid, b) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ips_iterate(double[:, ::1] Q, const double[::1] attention, const double[::1] target,
                double tol, int max_iter, double eps):
    """In-place alternating Bregman projections; returns (iterations, converged)."""
    cdef Py_ssize_t T = Q.shape[0]
    cdef Py_ssize_t M = Q.shape[1]
    cdef Py_ssize_t t, c, it
    cdef double wsum, viol, worst, rowsum, lam
    cdef double stall_ref = 1e300
    cdef bint converged = False, progress
    cdef int iterations = 0
    cdef double[::1] col = np.empty(M)
    weights_arr = np.asarray(attention) / T
    cdef double[::1] weights = weights_arr

    for it in range(max_iter):
        for c in range(1, M):
            wsum = 0.0
            for t in range(T):
                wsum += weights[t] * Q[t, c]
            col[c] = wsum
        worst = 0.0
        for c in range(1, M):
            viol = fabs(col[c] - target[c])
            if viol > worst:
                worst = viol
        if M == 1 or worst <= tol:
            converged = True
            break
        # boundary targets contract geometrically with ratio ~1; give up
        # once 100 passes improve the violation by less than half a percent
        if it % 100 == 0:
            if worst > 0.995 * stall_ref:
                break
            stall_ref = worst
        progress = False
        for c in range(1, M):
            if fabs(col[c] - target[c]) <= tol:
                continue
            if target[c] < eps:
                for t in range(T):
                    Q[t, c] = eps
                progress = True
            elif col[c] > eps:
                lam = _column_root(Q, weights, c, target[c])
                for t in range(T):
                    Q[t, c] *= exp(weights[t] * lam)
                progress = True
        if not progress:
            break
        for t in range(T):
            rowsum = 0.0
            for c in range(M):
                rowsum += Q[t, c]
            if rowsum < eps:
                rowsum = eps
            for c in range(M):
                Q[t, c] /= rowsum
        iterations += 1
    return iterations, bool(converged)


def diffuse_power(const double[:, ::1] R, const double[::1] w0, double beta, int iters):
    """Power iteration of the diffusion recurrence."""
    cdef Py_ssize_t K = w0.shape[0]
    cdef Py_ssize_t i, j, it
    cdef double acc
    out_arr = np.array(w0, dtype=np.float64)
    tmp_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] w = out_arr
    cdef double[::1] tmp = tmp_arr
    for it in range(iters):
        for i in range(K):
            acc = 0.0
            for j in range(K):
                acc += R[i, j] * w[j]
            tmp[i] = beta * acc + (1.0 - beta) * w0[i]
        w[:] = tmp
    return out_arr


def fuse_wavelets(const double[::1] starts, const double[::1] ends, const long[::1] channels,
                  const double[::1] weights, int T, int m):
    """Accumulate weighted Ricker wavelets sampled at frame centers."""
    cdef Py_ssize_t K = starts.shape[0]
    cdef Py_ssize_t i, t
    cdef double sigma, mid, amp, x, w
    cdef Py_ssize_t ch
    phi_arr = np.zeros((T, m), dtype=np.float64)
    cdef double[:, ::1] phi = phi_arr
    for i in range(K):
        sigma = 0.5 * (ends[i] - starts[i])
        mid = 0.5 * (ends[i] + starts[i])
        amp = 2.0 / (sqrt(3.0 * sigma) * PI_QUARTER)
        ch = channels[i] - 1
        w = weights[i]
        for t in range(T):
            x = (t + 0.5 - mid) / sigma
            phi[t, ch] += w * amp * (1.0 - x * x) * exp(-0.5 * x * x)
    return phi_arr


def threshold_runs(const double[::1] x, double thr, int min_len):
    """Maximal runs of x > thr with length >= min_len."""
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t t
    cdef Py_ssize_t run_start = -1
    starts_list = []
    ends_list = []
    for t in range(T):
        if x[t] > thr:
            if run_start < 0:
                run_start = t
        else:
            if run_start >= 0:
                if t - run_start >= min_len:
                    starts_list.append(run_start)
                    ends_list.append(t)
                run_start = -1
    if run_start >= 0 and T - run_start >= min_len:
        starts_list.append(run_start)
        ends_list.append(T)
    return (
        np.asarray(starts_list, dtype=np.int64),
        np.asarray(ends_list, dtype=np.int64),
    )


def soft_nms_order(const double[::1] starts, const double[::1] ends, const double[::1] scores,
                   const long[::1] attrs, double sigma, double floor, int max_keep):
    """Greedy Gaussian soft-NMS; returns (keep indices, kept scores)."""
    cdef Py_ssize_t K = starts.shape[0]
    cdef Py_ssize_t i, best
    cdef double inter, union_len, iou
    cdef bint better
    cur_arr = np.array(scores, dtype=np.float64)
    alive_arr = np.ones(K, dtype=np.uint8)
    cdef double[::1] cur = cur_arr
    cdef unsigned char[::1] alive = alive_arr
    keep_list = []
    score_list = []
    while len(keep_list) < max_keep:
        best = -1
        for i in range(K):
            if not alive[i]:
                continue
            if best < 0:
                best = i
                continue
            better = False
            if cur[i] > cur[best]:
                better = True
            elif cur[i] == cur[best]:
                if starts[i] < starts[best]:
                    better = True
                elif starts[i] == starts[best]:
                    if ends[i] < ends[best]:
                        better = True
                    elif ends[i] == ends[best] and attrs[i] < attrs[best]:
                        better = True
            if better:
                best = i
        if best < 0:
            break
        keep_list.append(best)
        score_list.append(cur[best])
        alive[best] = 0
        for i in range(K):
            if not alive[i]:
                continue
            inter = min(ends[best], ends[i]) - max(starts[best], starts[i])
            if inter > 0.0:
                union_len = (ends[best] - starts[best]) + (ends[i] - starts[i]) - inter
                iou = inter / union_len
                cur[i] *= exp(-(iou * iou) / sigma)
                if cur[i] < floor:
                    alive[i] = 0
            elif cur[i] < floor:
                alive[i] = 0
    return (
        np.asarray(keep_list, dtype=np.int64),
        np.asarray(score_list, dtype=np.float64),
    )
