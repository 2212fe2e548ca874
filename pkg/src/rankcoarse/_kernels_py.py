"""Numpy implementations of the hot kernels.

Signatures and outputs match ``_ckernels``; both consume the same pre-drawn
uniforms so a given seed yields identical samples under either backend.
All item indices here are 0-based.
"""

import numpy as np


def pl_sample_orderings(theta, u):
    """Sequential selection without replacement; one row of ``u`` per sample."""
    theta = np.asarray(theta, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n, K = u.shape[0], theta.shape[0]
    out = np.empty((n, K), dtype=np.int64)
    w = np.broadcast_to(theta, (n, K)).copy()
    rows = np.arange(n)
    for s in range(K - 1):
        cum = np.cumsum(w, axis=1)
        target = u[:, s] * cum[:, -1]
        idx = np.argmax(cum > target[:, None], axis=1)
        out[:, s] = idx
        w[rows, idx] = 0.0
    if K:
        out[:, K - 1] = np.argmax(w > 0, axis=1) if K > 1 else 0
    return out


def rim_sample_orderings(reference, cum, u):
    """Repeated insertion: item ``reference[t]`` goes to slot j with P given by row t of ``cum``."""
    reference = np.asarray(reference, dtype=np.int64)
    cum = np.asarray(cum, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n, K = u.shape[0], reference.shape[0]
    out = np.full((n, K), -1, dtype=np.int64)
    if K == 0:
        return out
    out[:, 0] = reference[0]
    cols = np.arange(K)
    for t in range(1, K):
        pos = np.argmax(cum[t, : t + 1][None, :] > u[:, t, None], axis=1)
        shifted = np.empty_like(out)
        shifted[:, 1:] = out[:, :-1]
        shifted[:, 0] = -1
        before = cols[None, :] < pos[:, None]
        at = cols[None, :] == pos[:, None]
        out = np.where(before, out, np.where(at, reference[t], shifted))
    return out


def pair_counts(orderings, pos_a, pos_b, K):
    """c[o[r, a_r], o[r, b_r]] += 1 for every row r."""
    orderings = np.asarray(orderings, dtype=np.int64)
    rows = np.arange(orderings.shape[0])
    w = orderings[rows, np.asarray(pos_a)]
    l = orderings[rows, np.asarray(pos_b)]
    flat = np.bincount(w * K + l, minlength=K * K)
    return flat.reshape(K, K).astype(np.int64)


def all_pair_counts(orderings, K):
    """Counts from breaking every ordering into all K(K-1)/2 preferences."""
    orderings = np.asarray(orderings, dtype=np.int64)
    flat = np.zeros(K * K, dtype=np.int64)
    for a in range(K):
        for b in range(a + 1, K):
            flat += np.bincount(orderings[:, a] * K + orderings[:, b], minlength=K * K)
    return flat.reshape(K, K)


def q_accumulate(orderings, probs, lam):
    """q[o[a], o[b]] += p(o) * lam[a, b] over all a < b and all orderings o."""
    orderings = np.asarray(orderings, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    K = lam.shape[0]
    flat = np.zeros(K * K, dtype=np.float64)
    for a in range(K):
        for b in range(a + 1, K):
            if lam[a, b] == 0.0:
                continue
            idx = orderings[:, a] * K + orderings[:, b]
            flat += np.bincount(idx, weights=probs * lam[a, b], minlength=K * K)
    return flat.reshape(K, K)


def _tie_tol(w):
    return 1e-9 * (1.0 + np.abs(w).sum())


def fas_dp(w):
    """Minimise sum of w[j, i] over pairs with i placed before j.

    Suffix dynamic program over subsets of already-placed items. The optimum
    reconstructed greedily by smallest item index is the lexicographically
    smallest optimal ordering.
    """
    w = np.asarray(w, dtype=np.float64)
    K = w.shape[0]
    if K == 0:
        return 0.0, np.empty(0, dtype=np.int64)
    full = (1 << K) - 1
    size = 1 << K
    subsets = np.arange(size, dtype=np.int64)
    # placed_in[v, S] = sum over u in S of w[u, v]
    placed_in = np.zeros((K, size), dtype=np.float64)
    for b in range(K):
        half = 1 << b
        for v in range(K):
            blk = placed_in[v].reshape(-1, 2 * half)
            blk[:, half:] = blk[:, :half] + w[b, v]
    col_total = w.sum(axis=0)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(K):
        popcount += (subsets >> b) & 1
    g = np.full(size, np.inf)
    g[full] = 0.0
    for m in range(K - 1, -1, -1):
        S = subsets[popcount == m]
        best = np.full(S.shape[0], np.inf)
        for v in range(K):
            mask = ((S >> v) & 1) == 0
            Sv = S[mask]
            # v precedes every unplaced u: pay w[u, v]
            cost = col_total[v] - placed_in[v, Sv] - w[v, v] + g[Sv | (1 << v)]
            best[mask] = np.minimum(best[mask], cost)
        g[S] = best
    order = np.empty(K, dtype=np.int64)
    S = 0
    tol = _tie_tol(w)
    for pos in range(K):
        target = g[S]
        for v in range(K):
            if (S >> v) & 1:
                continue
            cost = col_total[v] - placed_in[v, S] - w[v, v] + g[S | (1 << v)]
            if cost <= target + tol:
                order[pos] = v
                S |= 1 << v
                break
    return float(g[0]), order


def btl_mm(w, theta0, tol, max_iter):
    """Minorisation-maximisation for the Bradley-Terry likelihood with weights ``w``.

    Returns (theta normalised to sum 1, iterations, converged).
    """
    w = np.asarray(w, dtype=np.float64)
    theta = np.asarray(theta0, dtype=np.float64).copy()
    theta /= theta.sum()
    wins = w.sum(axis=1)
    n = w + w.T
    for it in range(1, max_iter + 1):
        denom = (n / (theta[:, None] + theta[None, :])).sum(axis=1)
        new = wins / denom
        new /= new.sum()
        change = np.max(np.abs(new - theta) / new)
        theta = new
        if change <= tol:
            return theta, it, True
    return theta, max_iter, False


def _ht_loss(n, r, p):
    K = p.shape[0]
    total = 0.0
    for i in range(K):
        for j in range(i + 1, K):
            if n[i, j] == 0.0:
                continue
            s = p[i] + p[j]
            mu = p[i] / s if s > 0.0 else 0.5
            rij = r[i, j]
            if rij > 0.0:
                total += n[i, j] * rij * np.log(rij / mu)
            if rij < 1.0:
                total += n[i, j] * (1.0 - rij) * np.log((1.0 - rij) / (1.0 - mu))
    return total


def ht_fixed_point(n, r, p0, tol, max_iter):
    """Hastie-Tibshirani coupling, coordinate-wise updates followed by renormalisation.

    Returns (p, iterations, converged, loss trace).
    """
    n = np.asarray(n, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    p = np.asarray(p0, dtype=np.float64).copy()
    p /= p.sum()
    K = p.shape[0]
    target = (n * r).sum(axis=1)
    losses = [_ht_loss(n, r, p)]
    for it in range(1, max_iter + 1):
        for i in range(K):
            s = p[i] + p
            mu = np.divide(p[i], s, out=np.zeros(K), where=s > 0)
            denom = (n[i] * mu).sum()
            if denom > 0.0:
                p[i] *= target[i] / denom
        p /= p.sum()
        losses.append(_ht_loss(n, r, p))
        if losses[-2] - losses[-1] < tol:
            return p, it, True, np.asarray(losses)
    return p, max_iter, False, np.asarray(losses)
