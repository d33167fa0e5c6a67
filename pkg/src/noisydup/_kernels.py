"""Compiled forward recursions.

All kernels run in the linear domain with per-step normalization and return
``(log2_prob, fail_step, normalizers)``. ``fail_step`` is -1 on success,
otherwise the 0-based step at which the forward mass vanished.

The two segment-aware kernels keep a window ``[lo, hi]`` of segment indices
(the segment that is open at the current sample). States outside the window
are either infeasible (they cannot finish exactly ``m`` segments at the last
sample) or were pruned because their share of the normalized mass fell
below ``eps``. ``eps = 0`` disables pruning and gives the exact value.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def forward_csr(indptr, indices, data, emis, start, y, keep):
    n = start.shape[0]
    T = y.shape[0]
    norms = np.empty(T if keep else 0)
    alpha = np.empty(n)
    nxt = np.empty(n)
    c = 0.0
    for j in range(n):
        alpha[j] = start[j] * emis[j, y[0]]
        c += alpha[j]
    if not c > 0.0:
        return -np.inf, 0, norms
    inv = 1.0 / c
    for j in range(n):
        alpha[j] *= inv
    total = math.log2(c)
    if keep:
        norms[0] = total
    for t in range(1, T):
        for j in range(n):
            nxt[j] = 0.0
        for i in range(n):
            a = alpha[i]
            if a == 0.0:
                continue
            for p in range(indptr[i], indptr[i + 1]):
                nxt[indices[p]] += a * data[p]
        yt = y[t]
        c = 0.0
        for j in range(n):
            nxt[j] *= emis[j, yt]
            c += nxt[j]
        if not c > 0.0:
            return -np.inf, t, norms
        inv = 1.0 / c
        for j in range(n):
            alpha[j] = nxt[j] * inv
        lc = math.log2(c)
        total += lc
        if keep:
            norms[t] = lc
    return total, -1, norms


@numba.njit(cache=True)
def _feasible_window(lo, hi, m, remaining, k_min, k_max):
    # after the current sample, `remaining` samples must be covered by the rest
    # of the open segment plus segments l+1..m-1
    flo = m - 1 - remaining // k_min
    fhi = m - (remaining + k_max - 1) // k_max
    if flo > lo:
        lo = flo
    if fhi < hi:
        hi = fhi
    if hi > m - 1:
        hi = m - 1
    return lo, hi


@numba.njit(cache=True)
def conditional_forward(s_seq, extend, terminate, W, y, k_min, eps, keep):
    """log2 P(y | s) with exactly len(s) segments ending at the last sample."""
    m = s_seq.shape[0]
    T = y.shape[0]
    K = extend.shape[0]
    norms = np.empty(T + 1 if keep else 0)
    cap = 16
    a = np.zeros((cap, K))
    b = np.zeros((cap, K))
    rows = np.zeros(cap)
    lo = 0
    hi = 0
    c = W[s_seq[0], y[0]]
    if not c > 0.0:
        return -np.inf, 0, norms
    a[0, 0] = 1.0
    total = math.log2(c)
    if keep:
        norms[0] = total
    for t in range(1, T):
        nlo, nhi = _feasible_window(lo, hi + 1, m, T - 1 - t, k_min, K)
        if nlo > nhi:
            return -np.inf, t, norms
        width = nhi - nlo + 1
        if width > cap:
            cap = 2 * width
            a2 = np.zeros((cap, K))
            a2[: hi - lo + 1] = a[: hi - lo + 1]
            a = a2
            b = np.zeros((cap, K))
            rows = np.zeros(cap)
        for i in range(width):
            for k in range(K):
                b[i, k] = 0.0
        for l in range(lo, hi + 1):
            i = l - lo
            done = 0.0
            keep_open = nlo <= l <= nhi
            for k in range(K):
                v = a[i, k]
                if v == 0.0:
                    continue
                if keep_open and k + 1 < K:
                    b[l - nlo, k + 1] += v * extend[k]
                done += v * terminate[k]
            if nlo <= l + 1 <= nhi:
                b[l + 1 - nlo, 0] += done
        yt = y[t]
        c = 0.0
        for i in range(width):
            w = W[s_seq[nlo + i], yt]
            r = 0.0
            for k in range(K):
                b[i, k] *= w
                r += b[i, k]
            rows[i] = r
            c += r
        if not c > 0.0:
            return -np.inf, t, norms
        lc = math.log2(c)
        total += lc
        if keep:
            norms[t] = lc
        first = 0
        last = width - 1
        if eps > 0.0:
            thr = eps * c
            while first < last and rows[first] < thr:
                first += 1
            while last > first and rows[last] < thr:
                last -= 1
        inv = 1.0 / c
        for i in range(first, last + 1):
            for k in range(K):
                a[i - first, k] = b[i, k] * inv
        lo = nlo + first
        hi = nlo + last
    if hi != m - 1:
        return -np.inf, T, norms
    c = 0.0
    for k in range(K):
        c += a[m - 1 - lo, k] * terminate[k]
    if not c > 0.0:
        return -np.inf, T, norms
    lc = math.log2(c)
    if keep:
        norms[T] = lc
    return total + lc, -1, norms


@numba.njit(cache=True)
def constrained_forward(P, init, extend, terminate, W, y, m, k_min, eps, keep):
    """log2 P(Y_1^t = y, exactly m segments ending at the last sample)."""
    T = y.shape[0]
    K = extend.shape[0]
    S = P.shape[0]
    norms = np.empty(T + 1 if keep else 0)
    cap = 16
    a = np.zeros((cap, S, K))
    b = np.zeros((cap, S, K))
    rows = np.zeros(cap)
    done = np.zeros(S)
    lo = 0
    hi = 0
    c = 0.0
    for s in range(S):
        a[0, s, 0] = init[s] * W[s, y[0]]
        c += a[0, s, 0]
    if not c > 0.0:
        return -np.inf, 0, norms
    for s in range(S):
        a[0, s, 0] /= c
    total = math.log2(c)
    if keep:
        norms[0] = total
    for t in range(1, T):
        nlo, nhi = _feasible_window(lo, hi + 1, m, T - 1 - t, k_min, K)
        if nlo > nhi:
            return -np.inf, t, norms
        width = nhi - nlo + 1
        if width > cap:
            cap = 2 * width
            a2 = np.zeros((cap, S, K))
            a2[: hi - lo + 1] = a[: hi - lo + 1]
            a = a2
            b = np.zeros((cap, S, K))
            rows = np.zeros(cap)
        for i in range(width):
            for s in range(S):
                for k in range(K):
                    b[i, s, k] = 0.0
        for l in range(lo, hi + 1):
            i = l - lo
            keep_open = nlo <= l <= nhi
            for s in range(S):
                d = 0.0
                for k in range(K):
                    v = a[i, s, k]
                    if v == 0.0:
                        continue
                    if keep_open and k + 1 < K:
                        b[l - nlo, s, k + 1] += v * extend[k]
                    d += v * terminate[k]
                done[s] = d
            if nlo <= l + 1 <= nhi:
                j = l + 1 - nlo
                for s in range(S):
                    if done[s] == 0.0:
                        continue
                    for s2 in range(S):
                        b[j, s2, 0] += done[s] * P[s, s2]
        yt = y[t]
        c = 0.0
        for i in range(width):
            r = 0.0
            for s in range(S):
                w = W[s, yt]
                for k in range(K):
                    b[i, s, k] *= w
                    r += b[i, s, k]
            rows[i] = r
            c += r
        if not c > 0.0:
            return -np.inf, t, norms
        lc = math.log2(c)
        total += lc
        if keep:
            norms[t] = lc
        first = 0
        last = width - 1
        if eps > 0.0:
            thr = eps * c
            while first < last and rows[first] < thr:
                first += 1
            while last > first and rows[last] < thr:
                last -= 1
        inv = 1.0 / c
        for i in range(first, last + 1):
            for s in range(S):
                for k in range(K):
                    a[i - first, s, k] = b[i, s, k] * inv
        lo = nlo + first
        hi = nlo + last
    if hi != m - 1:
        return -np.inf, T, norms
    c = 0.0
    for s in range(S):
        for k in range(K):
            c += a[m - 1 - lo, s, k] * terminate[k]
    if not c > 0.0:
        return -np.inf, T, norms
    lc = math.log2(c)
    if keep:
        norms[T] = lc
    return total + lc, -1, norms
