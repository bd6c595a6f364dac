"""Numba kernels for SC and SCL decoding of a single polar codeword.

Layout: LLRs at stage ``s`` (node size ``2**s``) live at offsets
``[2**s, 2**(s+1))`` of a length-``N`` buffer (stage ``n`` is the channel
vector and is never copied). ``left`` buffers use the same layout and hold the
partial sums of the most recent left child at each stage.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _boxplus(a, b, exact):
    m = min(abs(a), abs(b))
    out = m if (a >= 0.0) == (b >= 0.0) else -m
    if exact:
        out += math.log1p(math.exp(-abs(a + b))) - math.log1p(math.exp(-abs(a - b)))
    return out


@njit(cache=True, inline="always")
def _penalty(alpha, bit, exact):
    hard = 0 if alpha >= 0.0 else 1
    p = abs(alpha) if bit != hard else 0.0
    if exact:
        p += math.log1p(math.exp(-abs(alpha)))
    return p


@njit(cache=True, inline="always")
def _ctz(i):
    c = 0
    while (i & 1) == 0:
        i >>= 1
        c += 1
    return c


@njit(cache=True)
def sc_kernel(llr, frozen, exact, u_out):
    """Successive cancellation. Writes decisions into ``u_out`` and returns
    the path metric."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.empty(N, dtype=np.float64)
    left = np.zeros(N, dtype=np.uint8)
    cur = np.empty(N, dtype=np.uint8)
    metric = 0.0
    if N == 1:
        a = llr[0]
        bit = 0 if frozen[0] or a >= 0.0 else 1
        u_out[0] = bit
        return _penalty(a, bit, exact)
    for i in range(N):
        if i == 0:
            s = n
        else:
            top = _ctz(i) + 1
            h = 1 << (top - 1)
            for j in range(h):
                if top == n:
                    pa = llr[j]
                    pb = llr[h + j]
                else:
                    pa = alpha[2 * h + j]
                    pb = alpha[3 * h + j]
                sign = 1.0 - 2.0 * left[h + j]
                alpha[h + j] = pb + sign * pa
            s = top - 1
        while s > 0:
            h = 1 << (s - 1)
            for j in range(h):
                if s == n:
                    pa = llr[j]
                    pb = llr[h + j]
                else:
                    pa = alpha[2 * h + j]
                    pb = alpha[3 * h + j]
                alpha[h + j] = _boxplus(pa, pb, exact)
            s -= 1
        a = alpha[1]
        if frozen[i]:
            bit = 0
        else:
            bit = 0 if a >= 0.0 else 1
        u_out[i] = bit
        metric += _penalty(a, bit, exact)
        # propagate partial sums upwards
        cur[0] = bit
        size = 1
        s = 0
        while s < n:
            if ((i >> s) & 1) == 0:
                for j in range(size):
                    left[size + j] = cur[j]
                break
            for j in range(size):
                cur[size + j] = cur[j]
                cur[j] = left[size + j] ^ cur[j]
            size *= 2
            s += 1
    return metric


@njit(cache=True, inline="always")
def _clone(a_src, b_src, a_dst, b_dst, i, n):
    """Copy the parts of a path's state still read after leaf ``i``: LLRs of
    stage ``s`` while leaf ``i`` sits in the left half of its stage-``s``
    node, partial sums of stage ``s`` while it sits in a right half."""
    for s in range(n):
        h = 1 << s
        if s > 0 and ((i >> (s - 1)) & 1) == 0:
            for j in range(h, 2 * h):
                a_dst[j] = a_src[j]
        if (i >> s) & 1:
            for j in range(h, 2 * h):
                b_dst[j] = b_src[j]


@njit(cache=True)
def scl_core(llr, frozen, L, exact, u_out, pm_out):
    """List decoding with list size ``L``.

    Fills ``u_out[:count]`` / ``pm_out[:count]`` with the surviving paths in
    ascending metric order (ties by path creation order) and returns
    ``count``. Children are created hard-decision first, so ``L == 1``
    reproduces :func:`sc_kernel` exactly. Each path owns its LLR and
    partial-sum buffers, which are copied when a path splits.
    """
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.empty((L, N), dtype=np.float64)
    left = np.zeros((L, N), dtype=np.uint8)
    cur = np.empty(N, dtype=np.uint8)
    hist_bit = np.zeros((N, L), dtype=np.uint8)
    hist_parent = np.zeros((N, L), dtype=np.int64)
    pm = np.empty(L)
    leaf = np.empty(L)
    cand_pm = np.empty(2 * L)
    cand_bit = np.empty(2 * L, dtype=np.int64)
    new_pm = np.empty(L)
    new_parent = np.empty(L, dtype=np.int64)
    new_bit = np.empty(L, dtype=np.int64)
    slot = np.arange(L)
    new_slot = np.empty(L, dtype=np.int64)
    claimed = np.zeros(L, dtype=np.bool_)
    free = np.empty(L, dtype=np.int64)
    chosen = np.zeros(2 * L, dtype=np.bool_)
    best_pm = np.empty(L)
    best_idx = np.empty(L, dtype=np.int64)
    pm[0] = 0.0
    active = 1

    for i in range(N):
        if n == 0:
            for l in range(active):
                leaf[l] = llr[0]
        else:
            for l in range(active):
                a = alpha[slot[l]]
                b = left[slot[l]]
                if i == 0:
                    s = n
                else:
                    top = _ctz(i) + 1
                    h = 1 << (top - 1)
                    if top == n:
                        for j in range(h):
                            if b[h + j]:
                                a[h + j] = llr[h + j] - llr[j]
                            else:
                                a[h + j] = llr[h + j] + llr[j]
                    else:
                        for j in range(h):
                            if b[h + j]:
                                a[h + j] = a[3 * h + j] - a[2 * h + j]
                            else:
                                a[h + j] = a[3 * h + j] + a[2 * h + j]
                    s = top - 1
                while s > 0:
                    h = 1 << (s - 1)
                    if s == n:
                        for j in range(h):
                            a[h + j] = _boxplus(llr[j], llr[h + j], exact)
                    else:
                        for j in range(h):
                            a[h + j] = _boxplus(a[2 * h + j], a[3 * h + j], exact)
                    s -= 1
                leaf[l] = a[1]

        if frozen[i]:
            for l in range(active):
                pm[l] += _penalty(leaf[l], 0, exact)
                hist_bit[i, l] = 0
                hist_parent[i, l] = l
        else:
            nc = 2 * active
            for l in range(active):
                hard = 0 if leaf[l] >= 0.0 else 1
                cand_bit[2 * l] = hard
                cand_bit[2 * l + 1] = 1 - hard
                cand_pm[2 * l] = pm[l] + _penalty(leaf[l], hard, exact)
                cand_pm[2 * l + 1] = pm[l] + _penalty(leaf[l], 1 - hard, exact)
            keep = nc if nc < L else L
            for c in range(nc):
                chosen[c] = nc <= L
            if nc > L:
                # running sorted list of the `keep` best (metric, index)
                # pairs; a later candidate never displaces an equal metric
                cnt = 0
                for c in range(nc):
                    pc = cand_pm[c]
                    if cnt == keep and not pc < best_pm[keep - 1]:
                        continue
                    q = cnt if cnt < keep else keep - 1
                    if cnt < keep:
                        cnt += 1
                    while q > 0 and best_pm[q - 1] > pc:
                        best_pm[q] = best_pm[q - 1]
                        best_idx[q] = best_idx[q - 1]
                        q -= 1
                    best_pm[q] = pc
                    best_idx[q] = c
                for q in range(keep):
                    chosen[best_idx[q]] = True
            j = 0
            for c in range(nc):
                if not chosen[c]:
                    continue
                new_parent[j] = c // 2
                new_bit[j] = cand_bit[c]
                new_pm[j] = cand_pm[c]
                j += 1
            # first child inherits the parent's state, later ones get a copy
            # in a slot released by a pruned path
            for l in range(active):
                claimed[l] = False
            for j in range(keep):
                claimed[new_parent[j]] = True
            nfree = 0
            for m in range(L - 1, active - 1, -1):
                free[nfree] = slot[m]
                nfree += 1
            for l in range(active):
                if not claimed[l]:
                    free[nfree] = slot[l]
                    nfree += 1
                claimed[l] = False
            for j in range(keep):
                p = new_parent[j]
                if not claimed[p]:
                    claimed[p] = True
                    new_slot[j] = slot[p]
                else:
                    nfree -= 1
                    d = free[nfree]
                    _clone(alpha[slot[p]], left[slot[p]], alpha[d], left[d], i, n)
                    new_slot[j] = d
            # slots of pruned paths and unused slots, kept after the active ones
            for j in range(keep):
                slot[j] = new_slot[j]
            for m in range(nfree):
                slot[keep + m] = free[m]
            for j in range(keep):
                pm[j] = new_pm[j]
                hist_bit[i, j] = new_bit[j]
                hist_parent[i, j] = new_parent[j]
            active = keep

        for l in range(active):
            b = left[slot[l]]
            cur[0] = hist_bit[i, l]
            size = 1
            s = 0
            while s < n:
                if ((i >> s) & 1) == 0:
                    for j in range(size):
                        b[size + j] = cur[j]
                    break
                for j in range(size):
                    cur[size + j] = cur[j]
                    cur[j] = b[size + j] ^ cur[j]
                size *= 2
                s += 1

    # stable insertion sort of the survivors by metric
    order = new_parent
    for r in range(active):
        order[r] = r
    for r in range(1, active):
        o = order[r]
        q = r
        while q > 0 and pm[order[q - 1]] > pm[o]:
            order[q] = order[q - 1]
            q -= 1
        order[q] = o
    for r in range(active):
        p = order[r]
        pm_out[r] = pm[p]
        for i in range(N - 1, -1, -1):
            u_out[r, i] = hist_bit[i, p]
            p = hist_parent[i, p]
    return active


def scl_kernel(llr, frozen, L, exact, u_out, pm_out):
    return scl_core(llr, frozen, L, exact, u_out, pm_out)


@njit(cache=True)
def sc_batch(llrs, frozen, exact, u_out, pm_out):
    for b in range(llrs.shape[0]):
        pm_out[b] = sc_kernel(llrs[b], frozen[b], exact, u_out[b])


@njit(cache=True)
def scl_batch(llrs, frozen, L, exact, u_out, pm_out, counts):
    for b in range(llrs.shape[0]):
        counts[b] = scl_core(llrs[b], frozen[b], L, exact, u_out[b], pm_out[b])
