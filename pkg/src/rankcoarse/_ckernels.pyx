# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs, INFINITY

cnp.import_array()


def pl_sample_orderings(theta, u):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0], K = th.shape[0]
    out_arr = np.empty((n, K), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef double[::1] w = np.empty(K, dtype=np.float64)
    cdef Py_ssize_t r, s, k, pick, last
    cdef double total, target, cum
    for r in range(n):
        for k in range(K):
            w[k] = th[k]
        for s in range(K - 1):
            total = 0.0
            for k in range(K):
                total += w[k]
            target = uu[r, s] * total
            cum = 0.0
            pick = -1
            last = -1
            for k in range(K):
                cum += w[k]
                if w[k] > 0.0:
                    last = k
                if cum > target:
                    pick = k
                    break
            if pick < 0:
                pick = last
            out[r, s] = pick
            w[pick] = 0.0
        if K > 0:
            pick = 0
            for k in range(K):
                if w[k] > 0.0:
                    pick = k
                    break
            out[r, K - 1] = pick
    return out_arr


def rim_sample_orderings(reference, cum, u):
    cdef cnp.int64_t[::1] ref = np.ascontiguousarray(reference, dtype=np.int64)
    cdef double[:, ::1] cm = np.ascontiguousarray(cum, dtype=np.float64)
    cdef double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = uu.shape[0], K = ref.shape[0]
    out_arr = np.full((n, K), -1, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, t, j, pos
    for r in range(n):
        if K == 0:
            continue
        out[r, 0] = ref[0]
        for t in range(1, K):
            pos = 0
            for j in range(t + 1):
                if cm[t, j] > uu[r, t]:
                    pos = j
                    break
            for j in range(t, pos, -1):
                out[r, j] = out[r, j - 1]
            out[r, pos] = ref[t]
    return out_arr


def pair_counts(orderings, pos_a, pos_b, Py_ssize_t K):
    cdef cnp.int64_t[:, ::1] o = np.ascontiguousarray(orderings, dtype=np.int64)
    cdef cnp.int64_t[::1] a = np.ascontiguousarray(pos_a, dtype=np.int64)
    cdef cnp.int64_t[::1] b = np.ascontiguousarray(pos_b, dtype=np.int64)
    out_arr = np.zeros((K, K), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t r
    for r in range(o.shape[0]):
        out[o[r, a[r]], o[r, b[r]]] += 1
    return out_arr


def all_pair_counts(orderings, Py_ssize_t K):
    cdef cnp.int64_t[:, ::1] o = np.ascontiguousarray(orderings, dtype=np.int64)
    out_arr = np.zeros((K, K), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, x, y
    for r in range(o.shape[0]):
        for x in range(K):
            for y in range(x + 1, K):
                out[o[r, x], o[r, y]] += 1
    return out_arr


def q_accumulate(orderings, probs, lam):
    cdef cnp.int64_t[:, ::1] o = np.ascontiguousarray(orderings, dtype=np.int64)
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef double[:, ::1] lm = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Py_ssize_t K = lm.shape[0]
    out_arr = np.zeros((K, K), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r, x, y
    for x in range(K):
        for y in range(x + 1, K):
            if lm[x, y] == 0.0:
                continue
            for r in range(o.shape[0]):
                out[o[r, x], o[r, y]] += p[r] * lm[x, y]
    return out_arr


def fas_dp(w):
    cdef double[:, ::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t K = ww.shape[0]
    if K == 0:
        return 0.0, np.empty(0, dtype=np.int64)
    cdef Py_ssize_t size = (<Py_ssize_t>1) << K
    cdef Py_ssize_t full = size - 1
    g_arr = np.empty(size, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t S, v, u, comp, pos
    cdef double best, cost, inflow, tol, target, wsum = 0.0
    for u in range(K):
        for v in range(K):
            wsum += fabs(ww[u, v])
    tol = 1e-9 * (1.0 + wsum)
    g[full] = 0.0
    for S in range(full - 1, -1, -1):
        comp = full & ~S
        best = INFINITY
        for v in range(K):
            if not (comp >> v) & 1:
                continue
            inflow = 0.0
            for u in range(K):
                if u != v and (comp >> u) & 1:
                    inflow += ww[u, v]
            cost = inflow + g[S | ((<Py_ssize_t>1) << v)]
            if cost < best:
                best = cost
        g[S] = best
    order_arr = np.empty(K, dtype=np.int64)
    cdef cnp.int64_t[::1] order = order_arr
    S = 0
    for pos in range(K):
        comp = full & ~S
        target = g[S]
        for v in range(K):
            if not (comp >> v) & 1:
                continue
            inflow = 0.0
            for u in range(K):
                if u != v and (comp >> u) & 1:
                    inflow += ww[u, v]
            cost = inflow + g[S | ((<Py_ssize_t>1) << v)]
            if cost <= target + tol:
                order[pos] = v
                S |= (<Py_ssize_t>1) << v
                break
    return float(g[0]), order_arr


def btl_mm(w, theta0, double tol, Py_ssize_t max_iter):
    cdef double[:, ::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t K = ww.shape[0]
    theta_arr = np.array(theta0, dtype=np.float64)
    theta_arr /= theta_arr.sum()
    cdef double[::1] theta = theta_arr
    cdef double[::1] new = np.empty(K, dtype=np.float64)
    cdef double[::1] wins = np.zeros(K, dtype=np.float64)
    cdef Py_ssize_t i, j, it
    cdef double denom, nij, total, change, rel
    for i in range(K):
        for j in range(K):
            wins[i] += ww[i, j]
    for it in range(1, max_iter + 1):
        total = 0.0
        for i in range(K):
            denom = 0.0
            for j in range(K):
                nij = ww[i, j] + ww[j, i]
                if nij != 0.0:
                    denom += nij / (theta[i] + theta[j])
            new[i] = wins[i] / denom
            total += new[i]
        change = 0.0
        for i in range(K):
            new[i] /= total
            rel = fabs(new[i] - theta[i]) / new[i]
            if rel > change:
                change = rel
            theta[i] = new[i]
        if change <= tol:
            return theta_arr, it, True
    return theta_arr, max_iter, False


cdef double _ht_loss(double[:, ::1] n, double[:, ::1] r, double[::1] p):
    cdef Py_ssize_t K = p.shape[0], i, j
    cdef double total = 0.0, mu, rij, s
    for i in range(K):
        for j in range(i + 1, K):
            if n[i, j] == 0.0:
                continue
            s = p[i] + p[j]
            mu = p[i] / s if s > 0.0 else 0.5
            rij = r[i, j]
            if rij > 0.0:
                total += n[i, j] * rij * log(rij / mu)
            if rij < 1.0:
                total += n[i, j] * (1.0 - rij) * log((1.0 - rij) / (1.0 - mu))
    return total


def ht_fixed_point(n, r, p0, double tol, Py_ssize_t max_iter):
    cdef double[:, ::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef double[:, ::1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t K = nn.shape[0], i, j, it
    p_arr = np.array(p0, dtype=np.float64)
    p_arr /= p_arr.sum()
    cdef double[::1] p = p_arr
    cdef double[::1] target = np.zeros(K, dtype=np.float64)
    cdef double denom, s, total, prev, cur
    for i in range(K):
        for j in range(K):
            target[i] += nn[i, j] * rr[i, j]
    losses = [_ht_loss(nn, rr, p)]
    prev = losses[0]
    for it in range(1, max_iter + 1):
        for i in range(K):
            denom = 0.0
            for j in range(K):
                s = p[i] + p[j]
                if s > 0.0:
                    denom += nn[i, j] * (p[i] / s)
            if denom > 0.0:
                p[i] *= target[i] / denom
        total = 0.0
        for i in range(K):
            total += p[i]
        for i in range(K):
            p[i] /= total
        cur = _ht_loss(nn, rr, p)
        losses.append(cur)
        if prev - cur < tol:
            return p_arr, it, True, np.asarray(losses)
        prev = cur
    return p_arr, max_iter, False, np.asarray(losses)
