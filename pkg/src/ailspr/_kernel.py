"""Compiled neighborhood search.

A line-for-line array port of ``NeighborhoodSearch`` in ``search.py``: same
scan order, same tie-breaking, same arithmetic order, so both produce
identical solutions. The Python version stays the readable reference and is
used by the tests to cross-check this one.

Move-list layout: ``lm[a, b]`` for route indices a < b holds
(valid, score, kind, i, k, j, l).
"""

from __future__ import annotations

import numpy as np
from numba import njit

EPS = 1e-9
FEASIBILITY = 0
SHIFT, SWAP, TWO_OPT = 0, 1, 2
F_VALID, F_SCORE, F_KIND, F_I, F_K, F_J, F_L = range(7)


@njit(cache=True)
def _refresh(R, rlen, r, route_of, pos_of, pref, loads, demand):
    load = 0
    for pos in range(1, rlen[r] - 1):
        v = R[r, pos]
        route_of[v] = r
        pos_of[v] = pos
        load += demand[v]
        pref[v] = load
    loads[r] = load


@njit(cache=True)
def _evaluate(R, loads, pref, d, demand, cap, lm, mode, i, k, j, l):
    qi = loads[i]
    qj = loads[j]
    si = cap - qi
    sj = cap - qj
    if mode == FEASIBILITY and (si >= 0) == (sj >= 0):
        return
    before = (si if si < 0 else 0) + (sj if sj < 0 else 0)
    a_ = i if i < j else j
    b_ = j if i < j else i
    if lm[a_, b_, F_VALID] > 0:
        best = lm[a_, b_, F_SCORE]
    else:
        best = np.inf
    found = -1

    pv = R[i, k - 1]
    v = R[i, k]
    nv = R[i, k + 1]
    u = R[j, l]
    nu = R[j, l + 1]
    dvv = d[v, pv] + d[v, nv]
    qv = demand[v]

    delta = d[pv, nv] + d[v, u] + d[v, nu] - dvv - d[u, nu]
    x = si + qv
    y = sj - qv
    omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
    if mode == FEASIBILITY:
        if omega > 0:
            score = delta if delta <= 0 else delta / omega
            if score < best:
                best = score
                found = SHIFT
    elif omega >= 0 and delta < -EPS and delta < best:
        best = delta
        found = SHIFT

    if l > 0:
        pu = R[j, l - 1]
        qu = demand[u]
        delta = d[u, pv] + d[u, nv] + d[v, pu] + d[v, nu] - dvv - d[u, pu] - d[u, nu]
        x = si + qv - qu
        y = sj - qv + qu
        omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
        if mode == FEASIBILITY:
            if omega > 0:
                score = delta if delta <= 0 else delta / omega
                if score < best:
                    best = score
                    found = SWAP
        elif omega >= 0 and delta < -EPS and delta < best:
            best = delta
            found = SWAP

    delta = d[u, nv] + d[v, nu] - d[v, nv] - d[u, nu]
    if mode == FEASIBILITY or delta < -EPS:
        head_i = pref[v]
        head_j = pref[u] if l > 0 else 0
        x = cap - (head_i + qj - head_j)
        y = cap - (head_j + qi - head_i)
        omega = (x if x < 0 else 0) + (y if y < 0 else 0) - before
        if mode == FEASIBILITY:
            if omega > 0:
                score = delta if delta <= 0 else delta / omega
                if score < best:
                    best = score
                    found = TWO_OPT
        elif omega >= 0 and delta < best:
            best = delta
            found = TWO_OPT

    if found >= 0:
        lm[a_, b_, F_VALID] = 1.0
        lm[a_, b_, F_SCORE] = best
        lm[a_, b_, F_KIND] = found
        lm[a_, b_, F_I] = i
        lm[a_, b_, F_K] = k
        lm[a_, b_, F_J] = j
        lm[a_, b_, F_L] = l
    return


@njit(cache=True)
def _scan_vertex(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near, lm, mode, v, only):
    i = route_of[v]
    k = pos_of[v]
    depot = False
    for t in range(near.shape[1]):
        u = near[v, t]
        if u == 0:
            depot = True
            continue
        j = route_of[u]
        if j == i or j < 0 or (only >= 0 and j != only):
            continue
        _evaluate(R, loads, pref, d, demand, cap, lm, mode, i, k, j, pos_of[u])
    if only >= 0:
        if only != i and (depot or rlen[only] == 2):
            _evaluate(R, loads, pref, d, demand, cap, lm, mode, i, k, only, 0)
        return
    for j in range(m):
        if j != i and (depot or rlen[j] == 2):
            _evaluate(R, loads, pref, d, demand, cap, lm, mode, i, k, j, 0)


@njit(cache=True)
def _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
            inv_ptr, inv_idx, mark, lm, mode, r, reverse):
    for k in range(1, rlen[r] - 1):
        _scan_vertex(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near, lm, mode, R[r, k], -1)
    if not reverse:
        return
    n = route_of.shape[0] - 1
    if rlen[r] == 2:
        for w in range(1, n + 1):
            mark[w] = 1 if route_of[w] >= 0 else 0
    else:
        for w in range(n + 1):
            mark[w] = 0
        for p in range(inv_ptr[0], inv_ptr[1]):
            mark[inv_idx[p]] = 1
        for pos in range(1, rlen[r] - 1):
            u = R[r, pos]
            for p in range(inv_ptr[u], inv_ptr[u + 1]):
                mark[inv_idx[p]] = 1
    for w in range(1, n + 1):
        if mark[w] and route_of[w] != r and route_of[w] >= 0:
            _scan_vertex(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near, lm, mode, w, r)


@njit(cache=True)
def _best_intra(R, rlen, r, d):
    bd = -EPS
    bkind = -1
    ba = 0
    bb = 0
    last = rlen[r] - 2
    for a in range(1, last + 1):
        pa = R[r, a - 1]
        x = R[r, a]
        na = R[r, a + 1]
        dpx = d[pa, x]
        dxn = d[x, na]
        for b in range(a + 1, last + 1):
            y = R[r, b]
            nb = R[r, b + 1]
            delta = d[pa, y] + d[x, nb] - dpx - d[y, nb]
            if delta < bd:
                bd = delta
                bkind = TWO_OPT
                ba = a
                bb = b
        for b in range(a + 2, last + 1):
            pb = R[r, b - 1]
            y = R[r, b]
            nb = R[r, b + 1]
            delta = d[pa, y] + d[y, na] + d[pb, x] + d[x, nb] - dpx - dxn - d[pb, y] - d[y, nb]
            if delta < bd:
                bd = delta
                bkind = SWAP
                ba = a
                bb = b
        gain = d[pa, na] - dpx - dxn
        for t in range(0, last + 1):
            if t == a or t == a - 1:
                continue
            p = R[r, t]
            q = R[r, t + 1]
            delta = gain + d[x, p] + d[x, q] - d[p, q]
            if delta < bd:
                bd = delta
                bkind = SHIFT
                ba = a
                bb = t
    return bkind, ba, bb


@njit(cache=True)
def _intra_search(R, rlen, r, d, route_of, pos_of, pref, loads, demand):
    if rlen[r] < 4:
        return
    changed = False
    while True:
        kind, a, b = _best_intra(R, rlen, r, d)
        if kind < 0:
            break
        changed = True
        if kind == TWO_OPT:
            lo = a
            hi = b
            while lo < hi:
                tmp = R[r, lo]
                R[r, lo] = R[r, hi]
                R[r, hi] = tmp
                lo += 1
                hi -= 1
        elif kind == SWAP:
            tmp = R[r, a]
            R[r, a] = R[r, b]
            R[r, b] = tmp
        else:
            x = R[r, a]
            if b < a:
                # lands at index b + 1, shifting a's predecessors right
                for p in range(a, b + 1, -1):
                    R[r, p] = R[r, p - 1]
                R[r, b + 1] = x
            else:
                for p in range(a, b):
                    R[r, p] = R[r, p + 1]
                R[r, b] = x
    if changed:
        _refresh(R, rlen, r, route_of, pos_of, pref, loads, demand)


@njit(cache=True)
def _apply(R, rlen, kind, i, k, j, l, buf):
    if kind == SHIFT:
        v = R[i, k]
        for p in range(k, rlen[i] - 1):
            R[i, p] = R[i, p + 1]
        rlen[i] -= 1
        for p in range(rlen[j], l + 1, -1):
            R[j, p] = R[j, p - 1]
        R[j, l + 1] = v
        rlen[j] += 1
    elif kind == SWAP:
        tmp = R[i, k]
        R[i, k] = R[j, l]
        R[j, l] = tmp
    else:
        ta = rlen[i] - (k + 1)
        for p in range(ta):
            buf[p] = R[i, k + 1 + p]
        tb = rlen[j] - (l + 1)
        for p in range(tb):
            R[i, k + 1 + p] = R[j, l + 1 + p]
        for p in range(ta):
            R[j, l + 1 + p] = buf[p]
        rlen[i] = k + 1 + tb
        rlen[j] = l + 1 + ta


@njit(cache=True)
def search(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
           inv_ptr, inv_idx, mode, dirty, full):
    """Run the search in place; returns the final route count, or -1 when the
    feasibility search gave up. ``R`` must have room for ``m + n`` routes."""
    n = route_of.shape[0] - 1
    if m == 0:
        R[0, 0] = 0
        R[0, 1] = 0
        rlen[0] = 2
        loads[0] = 0
        m = 1
    if mode == FEASIBILITY:
        ok = True
        for r in range(m):
            if loads[r] > cap:
                ok = False
        if ok:
            return m
    lm = np.zeros((m + 4, m + 4, 7))
    mark = np.zeros(n + 1, np.int64)
    buf = np.empty(n + 2, np.int64)
    if full:
        for r in range(m):
            _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
                    inv_ptr, inv_idx, mark, lm, mode, r, False)
    else:
        for t in range(dirty.shape[0]):
            _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
                    inv_ptr, inv_idx, mark, lm, mode, dirty[t], True)
    added = 0
    while True:
        while True:
            ba = -1
            bb = -1
            best = np.inf
            for a in range(m):
                for b in range(a + 1, m):
                    if lm[a, b, F_VALID] > 0 and lm[a, b, F_SCORE] < best:
                        best = lm[a, b, F_SCORE]
                        ba = a
                        bb = b
            if ba < 0:
                break
            kind = int(lm[ba, bb, F_KIND])
            i = int(lm[ba, bb, F_I])
            k = int(lm[ba, bb, F_K])
            j = int(lm[ba, bb, F_J])
            l = int(lm[ba, bb, F_L])
            _apply(R, rlen, kind, i, k, j, l, buf)
            _refresh(R, rlen, i, route_of, pos_of, pref, loads, demand)
            _refresh(R, rlen, j, route_of, pos_of, pref, loads, demand)
            for r in range(m):
                lm[i, r, F_VALID] = 0.0
                lm[r, i, F_VALID] = 0.0
                lm[j, r, F_VALID] = 0.0
                lm[r, j, F_VALID] = 0.0
            _intra_search(R, rlen, i, d, route_of, pos_of, pref, loads, demand)
            _intra_search(R, rlen, j, d, route_of, pos_of, pref, loads, demand)
            _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
                    inv_ptr, inv_idx, mark, lm, mode, i, True)
            _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
                    inv_ptr, inv_idx, mark, lm, mode, j, True)
        if mode != FEASIBILITY:
            return m
        ok = True
        for r in range(m):
            if loads[r] > cap:
                ok = False
        if ok:
            return m
        added += 1
        if added > n or m >= R.shape[0]:
            return -1
        if m >= lm.shape[0]:
            grown = np.zeros((2 * m, 2 * m, 7))
            grown[:m, :m, :] = lm[:m, :m, :]
            lm = grown
        R[m, 0] = 0
        R[m, 1] = 0
        rlen[m] = 2
        loads[m] = 0
        m += 1
        _update(R, rlen, m, route_of, pos_of, pref, loads, d, demand, cap, near,
                inv_ptr, inv_idx, mark, lm, mode, m - 1, True)
