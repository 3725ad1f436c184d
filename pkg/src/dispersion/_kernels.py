"""Compiled search kernels shared by the exact and grid-cover solvers.

All kernels write their result into caller-owned buffers:

* ``best``  -- float64[1], current best volume (start below 0);
* ``best_lo`` / ``best_hi`` -- float64[d], witness of ``best``;
* ``cur_lo`` / ``cur_hi``   -- float64[d], scratch for the box being built;
* ``work``  -- int64[3]: (nodes visited, node budget, aborted flag).

Volumes are formed left to right as ``((1*w_0)*w_1)*...`` to agree exactly
with :func:`dispersion.geometry.box_volume`. Ties in volume go to the
lexicographically smallest witness ``(lo_0, hi_0, lo_1, hi_1, ...)``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lex_less(lo_a, hi_a, lo_b, hi_b):
    for k in range(lo_a.shape[0]):
        if lo_a[k] != lo_b[k]:
            return lo_a[k] < lo_b[k]
        if hi_a[k] != hi_b[k]:
            return hi_a[k] < hi_b[k]
    return False


@njit(cache=True, nogil=True)
def _offer(vol, cur_lo, cur_hi, best, best_lo, best_hi):
    if vol > best[0] or (vol == best[0] and _lex_less(cur_lo, cur_hi, best_lo, best_hi)):
        best[0] = vol
        best_lo[:] = cur_lo
        best_hi[:] = cur_hi


@njit(cache=True, nogil=True)
def _tick(work):
    work[0] += 1
    if work[0] > work[1]:
        work[2] = 1
        return True
    return False


# --------------------------------------------------------------------------
# exact search: candidate faces come from point coordinates and the cube


@njit(cache=True, nogil=True)
def _exact_leaf1(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi):
    vals = np.sort(P[idx, k])
    prev = 0.0
    g = -1.0
    glo = 0.0
    ghi = 1.0
    for v in vals:
        if v - prev > g:
            g = v - prev
            glo = prev
            ghi = v
        prev = v
    if 1.0 - prev > g:
        glo = prev
        ghi = 1.0
    cur_lo[k] = glo
    cur_hi[k] = ghi
    _offer(scale * (ghi - glo), cur_lo, cur_hi, best, best_lo, best_hi)


@njit(cache=True, nogil=True)
def _exact_leaf2(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work):
    """Largest empty rectangle on axes (k, k+1) over the points ``idx``.

    For each left edge the strip is shrunk from the right; removing a point
    merges two vertical gaps, so the widest gap is maintained in O(1).
    """
    s = idx.shape[0]
    a = k
    b = k + 1
    ua = P[idx, a]
    vb = P[idx, b]
    ordb = np.argsort(vb, kind="mergesort")
    # node 0 = bottom sentinel, node s+1 = top sentinel, node r+1 = r-th point by vb
    val = np.empty(s + 2)
    val[0] = 0.0
    val[s + 1] = 1.0
    node_of = np.empty(s, dtype=np.int64)
    for r in range(s):
        val[r + 1] = vb[ordb[r]]
        node_of[ordb[r]] = r + 1
    orda = np.argsort(ua, kind="mergesort")
    us = ua[orda]
    prv = np.empty(s + 2, dtype=np.int64)
    nxt = np.empty(s + 2, dtype=np.int64)
    member = np.zeros(s + 2, dtype=np.bool_)

    start = 0
    lo = 0.0
    while True:
        while start < s and us[start] <= lo:
            start += 1
        if scale * (1.0 - lo) < best[0]:
            break
        if _tick(work):
            return
        # points strictly right of lo, linked in vertical order
        for r in range(s + 2):
            member[r] = False
        member[0] = True
        member[s + 1] = True
        for j in range(start, s):
            member[node_of[orda[j]]] = True
        last = 0
        g = -1.0
        glo = 0.0
        ghi = 1.0
        for r in range(1, s + 2):
            if member[r]:
                prv[r] = last
                nxt[last] = r
                gap = val[r] - val[last]
                if gap > g:
                    g = gap
                    glo = val[last]
                    ghi = val[r]
                last = r
        ptr = s - 1
        hi = 1.0
        while True:
            # drop points with u >= hi; the strip is lo < u < hi
            while ptr >= start and us[ptr] >= hi:
                q = node_of[orda[ptr]]
                p = prv[q]
                n = nxt[q]
                nxt[p] = n
                prv[n] = p
                gap = val[n] - val[p]
                if gap > g or (gap == g and val[p] < glo):
                    g = gap
                    glo = val[p]
                    ghi = val[n]
                ptr -= 1
            w = hi - lo
            if scale * w < best[0]:
                break
            cur_lo[a] = lo
            cur_hi[a] = hi
            cur_lo[b] = glo
            cur_hi[b] = ghi
            _offer(scale * w * (ghi - glo), cur_lo, cur_hi, best, best_lo, best_hi)
            if ptr < start:
                break
            hi = us[ptr]
        # next distinct left edge
        if start >= s:
            break
        lo = us[start]
        if lo >= 1.0:
            break


@njit(cache=True, nogil=True)
def _absorb(v, vmin, vmax, pred, succ):
    """Fold one point's vertical coordinate into the gap around [vmin, vmax]."""
    if v < vmin:
        if v > pred:
            pred = v
    elif v > vmax:
        if v < succ:
            succ = v
    else:
        return pred, succ, False
    return pred, succ, True


@njit(cache=True, nogil=True)
def _exact_leaf2_anchored(P, idx, k, scale, anc_u, anc_v,
                          cur_lo, cur_hi, best, best_lo, best_hi, work):
    """Rectangles on axes (k, k+1) whose open interior holds every anchor.

    Anchors are the projections of the points supporting the parent slab's
    faces; an optimal box that does not contain them could be grown along
    the parent axis. Left edges are scanned outward from the anchors and
    right edges use prefix gaps, so each candidate costs O(1).
    """
    a = k
    b = k + 1
    umin = anc_u.min()
    umax = anc_u.max()
    vmin = anc_v.min()
    vmax = anc_v.max()
    ua = P[idx, a]
    vb = P[idx, b]
    pred0 = 0.0
    succ0 = 1.0
    for t in range(idx.shape[0]):
        if umin <= ua[t] <= umax:
            pred0, succ0, ok = _absorb(vb[t], vmin, vmax, pred0, succ0)
            if not ok:
                return
    right = np.flatnonzero(ua > umax)
    right = right[np.argsort(ua[right], kind="mergesort")]
    nr = right.shape[0]
    # prefix gaps after absorbing the first t right-hand groups
    r_hi = np.empty(nr + 1)
    r_pred = np.empty(nr + 1)
    r_succ = np.empty(nr + 1)
    g = 0
    pred = 0.0
    succ = 1.0
    t = 0
    while True:
        hi = ua[right[t]] if t < nr else 1.0
        if hi > 1.0:
            hi = 1.0
        r_hi[g] = hi
        r_pred[g] = pred
        r_succ[g] = succ
        g += 1
        if t >= nr or hi >= 1.0:
            break
        ok = True
        while t < nr and ua[right[t]] == hi:
            pred, succ, ok = _absorb(vb[right[t]], vmin, vmax, pred, succ)
            t += 1
            if not ok:
                break
        if not ok:
            break
    left = np.flatnonzero(ua < umin)
    left = left[np.argsort(-ua[left], kind="mergesort")]
    nl = left.shape[0]
    t = 0
    pl = pred0
    sl = succ0
    while True:
        if scale * (sl - pl) < best[0]:
            break
        lo = ua[left[t]] if t < nl else 0.0
        if _tick(work):
            return
        for h in range(g):
            p = max(pl, r_pred[h])
            q = min(sl, r_succ[h])
            if scale * (1.0 - lo) * (q - p) < best[0]:
                break
            hi = r_hi[h]
            cur_lo[a] = lo
            cur_hi[a] = hi
            cur_lo[b] = p
            cur_hi[b] = q
            _offer(scale * (hi - lo) * (q - p), cur_lo, cur_hi, best, best_lo, best_hi)
        if t >= nl or lo <= 0.0:
            break
        ok = True
        while t < nl and ua[left[t]] == lo:
            pl, sl, ok = _absorb(vb[left[t]], vmin, vmax, pl, sl)
            t += 1
            if not ok:
                break
        if not ok:
            break


@njit(cache=True, nogil=True)
def _exact_level(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work):
    """Slabs along axis ``k`` followed by the rectangle search on k+1, k+2."""
    s = idx.shape[0]
    vals = P[idx, k]
    order = np.argsort(vals, kind="mergesort")
    vs = vals[order]
    anc_u = np.empty(2)
    anc_v = np.empty(2)
    start = 0
    lo = 0.0
    while True:
        lo_first = start
        while start < s and vs[start] <= lo:
            start += 1
        # a face strictly inside the cube must be touched by exactly one known point
        lo_count = start - lo_first if lo > 0.0 else 0
        if scale * (1.0 - lo) < best[0]:
            break
        j = start
        while True:
            hi = vs[j] if j < s else 1.0
            j2 = j
            while j2 < s and vs[j2] == hi:
                j2 += 1
            hi_count = j2 - j if hi < 1.0 else 0
            w = hi - lo
            if scale * w >= best[0] and w > 0.0:
                if _tick(work):
                    return
                cur_lo[k] = lo
                cur_hi[k] = hi
                child = idx[order[start:j]]
                na = 0
                if lo_count == 1:
                    r = idx[order[lo_first]]
                    anc_u[na] = P[r, k + 1]
                    anc_v[na] = P[r, k + 2]
                    na += 1
                if hi_count == 1:
                    r = idx[order[j]]
                    anc_u[na] = P[r, k + 1]
                    anc_v[na] = P[r, k + 2]
                    na += 1
                if na > 0 and lo_count <= 1 and hi_count <= 1:
                    _exact_leaf2_anchored(P, child, k + 1, scale * w, anc_u[:na], anc_v[:na],
                                          cur_lo, cur_hi, best, best_lo, best_hi, work)
                else:
                    _exact_leaf2(P, child, k + 1, scale * w,
                                 cur_lo, cur_hi, best, best_lo, best_hi, work)
                if work[2]:
                    return
            if j >= s or hi >= 1.0:
                break
            j = j2
        if start >= s:
            break
        lo = vs[start]
        if lo >= 1.0:
            break


@njit(cache=True, nogil=True)
def _exact_low_dim(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work):
    d = P.shape[1]
    if k == d - 1:
        _exact_leaf1(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi)
    elif k == d - 2:
        _exact_leaf2(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work)
    else:
        _exact_level(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work)


def _exact_outer(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work):
    # axes 0..d-4 are sliced here; the last three axes run compiled
    if work[2]:
        return
    if k >= P.shape[1] - 3:
        _exact_low_dim(P, idx, k, scale, cur_lo, cur_hi, best, best_lo, best_hi, work)
        return
    vals = P[idx, k]
    order = np.argsort(vals, kind="mergesort")
    vs = vals[order]
    s = vs.shape[0]
    start = 0
    lo = 0.0
    while True:
        while start < s and vs[start] <= lo:
            start += 1
        if scale * (1.0 - lo) < best[0]:
            break
        j = start
        while True:
            hi = vs[j] if j < s else 1.0
            w = hi - lo
            if scale * w >= best[0] and w > 0.0:
                work[0] += 1
                if work[0] > work[1]:
                    work[2] = 1
                    return
                cur_lo[k] = lo
                cur_hi[k] = hi
                _exact_outer(P, idx[order[start:j]], k + 1, scale * w,
                             cur_lo, cur_hi, best, best_lo, best_hi, work)
                if work[2]:
                    return
            if j >= s or hi >= 1.0:
                break
            while j < s and vs[j] == hi:
                j += 1
        if start >= s:
            break
        lo = vs[start]
        if lo >= 1.0:
            break


def exact_search(P, budget):
    """Exact largest empty box of the rows of ``P``; returns (vol, lo, hi, work)."""
    n, d = P.shape
    best = np.array([-1.0])
    best_lo = np.zeros(d)
    best_hi = np.ones(d)
    cur_lo = np.zeros(d)
    cur_hi = np.ones(d)
    work = np.array([0, budget, 0], dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    _exact_outer(P, idx, 0, 1.0, cur_lo, cur_hi, best, best_lo, best_hi, work)
    return best[0], best_lo, best_hi, work


# --------------------------------------------------------------------------
# grid search: every face sits on a multiple of 1/m


@njit(cache=True, nogil=True)
def ceil_index(t, m):
    """Smallest j with j/m >= t."""
    j = int(math.ceil(t * m))
    while j > 0 and (j - 1) / m >= t:
        j -= 1
    while j / m < t:
        j += 1
    return j


@njit(cache=True, nogil=True)
def floor_index(t, m):
    """Largest j with j/m <= t."""
    j = int(math.floor(t * m))
    while j < m and (j + 1) / m <= t:
        j += 1
    while j / m > t:
        j -= 1
    return j


@njit(cache=True, nogil=True)
def _grid_leaf(P, idx, k, m, scale, cur_lo, cur_hi, best, best_lo, best_hi):
    vals = np.sort(P[idx, k])
    prev = 0.0
    g = -1.0
    glo = 0.0
    ghi = 0.0
    for t in range(vals.shape[0] + 1):
        v = vals[t] if t < vals.shape[0] else 1.0
        ia = ceil_index(prev, m)
        ib = floor_index(v, m)
        if ib > ia:
            lo = ia / m
            hi = ib / m
            if hi - lo > g:
                g = hi - lo
                glo = lo
                ghi = hi
        prev = v
    if g < 0.0:
        # no grid interval fits: degenerate box on the first grid line
        g = 0.0
        glo = 0.0
        ghi = 0.0
    cur_lo[k] = glo
    cur_hi[k] = ghi
    _offer(scale * (ghi - glo), cur_lo, cur_hi, best, best_lo, best_hi)


@njit(cache=True, nogil=True)
def _arc_len(x, y):
    if x < y:
        return y - x
    return (1.0 - x) + y


@njit(cache=True, nogil=True)
def _periodic_leaf(P, idx, k, m, scale, cur_lo, cur_hi, best, best_lo, best_hi):
    vals = np.sort(P[idx, k])
    s = vals.shape[0]
    if s == 0:
        cur_lo[k] = 0.0
        cur_hi[k] = 0.0
        _offer(scale * 1.0, cur_lo, cur_hi, best, best_lo, best_hi)
        return
    for t in range(s - 1):
        ia = ceil_index(vals[t], m)
        ib = floor_index(vals[t + 1], m)
        if ib > ia:
            x = ia / m
            y = ib / m
            cur_lo[k] = x
            cur_hi[k] = y
            _offer(scale * (y - x), cur_lo, cur_hi, best, best_lo, best_hi)
    # gap through the 0/1 seam: arc [0, y) U (x, 1]
    x = ceil_index(vals[s - 1], m) / m
    y = floor_index(vals[0], m) / m
    cur_lo[k] = x
    cur_hi[k] = y
    _offer(scale * _arc_len(x, y), cur_lo, cur_hi, best, best_lo, best_hi)


@njit(cache=True, nogil=True)
def grid_search(P, m, periodic, budget):
    """Largest empty grid-aligned (optionally periodic) box; returns (vol, lo, hi, work).

    Axes 0..d-2 are enumerated depth first with an explicit stack; the last
    axis is solved directly from the sorted coordinates of surviving points.
    """
    n, d = P.shape
    best = np.array([-1.0])
    best_lo = np.zeros(d)
    best_hi = np.zeros(d)
    cur_lo = np.zeros(d)
    cur_hi = np.zeros(d)
    work = np.array([0, budget, 0], dtype=np.int64)
    active = np.empty((d, n), dtype=np.int64)
    count = np.zeros(d, dtype=np.int64)
    scale = np.ones(d)
    pa = np.zeros(d, dtype=np.int64)
    pb = np.zeros(d, dtype=np.int64)
    for i in range(n):
        active[0, i] = i
    count[0] = n
    if d == 1:
        if periodic:
            _periodic_leaf(P, active[0, :n], 0, m, 1.0, cur_lo, cur_hi, best, best_lo, best_hi)
        else:
            _grid_leaf(P, active[0, :n], 0, m, 1.0, cur_lo, cur_hi, best, best_lo, best_hi)
        return best[0], best_lo, best_hi, work
    top = m if periodic else m - 1
    level = 0
    pa[0] = 0
    pb[0] = -1 if periodic else 0
    while level >= 0:
        # advance to the next interval/arc on this axis
        b = pb[level] + 1
        a = pa[level]
        if periodic:
            if b > m:
                a += 1
                b = 0
        else:
            if b > m:
                a += 1
                b = a + 1
        if a > top:
            level -= 1
            continue
        pa[level] = a
        pb[level] = b
        x = a / m
        y = b / m
        w = _arc_len(x, y) if periodic else y - x
        if not periodic and scale[level] * (1.0 - x) < best[0]:
            level -= 1
            continue
        if scale[level] * w < best[0]:
            continue
        if _tick(work):
            break
        c = 0
        for t in range(count[level]):
            i = active[level, t]
            v = P[i, level]
            if x < y:
                inside = x < v < y
            else:
                inside = v < y or v > x
            if inside:
                active[level + 1, c] = i
                c += 1
        count[level + 1] = c
        cur_lo[level] = x
        cur_hi[level] = y
        scale[level + 1] = scale[level] * w
        if level + 1 == d - 1:
            if _tick(work):
                break
            if periodic:
                _periodic_leaf(P, active[level + 1, :c], level + 1, m, scale[level + 1],
                               cur_lo, cur_hi, best, best_lo, best_hi)
            else:
                _grid_leaf(P, active[level + 1, :c], level + 1, m, scale[level + 1],
                           cur_lo, cur_hi, best, best_lo, best_hi)
        else:
            level += 1
            pa[level] = 0
            pb[level] = -1 if periodic else 0
    return best[0], best_lo, best_hi, work
