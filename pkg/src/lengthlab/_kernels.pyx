# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: dense Floyd-Warshall and the GH branch and bound."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cdef int64_t INF = (<int64_t>1) << 62


def floyd_warshall(w):
    cdef cnp.ndarray[int64_t, ndim=2] d = np.array(w, dtype=np.int64, copy=True)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, j, k
    cdef int64_t dik, alt
    cdef int64_t[:, ::1] dv = d
    for k in range(n):
        for i in range(n):
            dik = dv[i, k]
            if dik >= INF:
                continue
            for j in range(n):
                alt = dik + dv[k, j]
                if alt < dv[i, j]:
                    dv[i, j] = alt
    return [list(row) for row in d]


cdef struct Search:
    int n
    int m
    int nord
    int npairs
    int found
    int64_t best


cdef inline int64_t iabs(int64_t v) nogil:
    return -v if v < 0 else v


cdef int64_t _added(int64_t[:, ::1] dx, int64_t[:, ::1] dy, int[::1] px, int[::1] py,
                    int npairs, int x, int y, int64_t cur, int64_t bound) nogil:
    cdef int a
    cdef int64_t v, worst = cur
    for a in range(npairs):
        v = iabs(dx[x, px[a]] - dy[y, py[a]])
        if v > worst:
            worst = v
            if worst >= bound:
                return worst
    return worst


cdef void _rec(Search* s, int k, int64_t cur,
               int64_t[:, ::1] dx, int64_t[:, ::1] dy,
               int64_t[::1] ex, int64_t[::1] ey,
               int[::1] oside, int[::1] oidx,
               int[::1] cx, int[::1] cy,
               int[::1] px, int[::1] py,
               int[::1] bx, int[::1] by, int* bn) nogil:
    cdef int side, i, j, a
    cdef int64_t diff, new
    while k < s.nord:
        side = oside[k]
        i = oidx[k]
        if (cx[i] if side == 0 else cy[i]) == 0:
            break
        k += 1
    if k == s.nord:
        s.best = cur
        s.found = 1
        for a in range(s.npairs):
            bx[a] = px[a]
            by[a] = py[a]
        bn[0] = s.npairs
        return
    side = oside[k]
    i = oidx[k]
    if side == 0:
        for j in range(s.m):
            diff = iabs(ex[i] - ey[j])
            if diff >= s.best:
                continue
            new = _added(dx, dy, px, py, s.npairs, i, j, cur if cur > diff else diff, s.best)
            if new < s.best:
                px[s.npairs] = i
                py[s.npairs] = j
                s.npairs += 1
                cx[i] += 1
                cy[j] += 1
                _rec(s, k + 1, new, dx, dy, ex, ey, oside, oidx, cx, cy, px, py, bx, by, bn)
                s.npairs -= 1
                cx[i] -= 1
                cy[j] -= 1
    else:
        for j in range(s.n):
            diff = iabs(ex[j] - ey[i])
            if diff >= s.best:
                continue
            new = _added(dx, dy, px, py, s.npairs, j, i, cur if cur > diff else diff, s.best)
            if new < s.best:
                px[s.npairs] = j
                py[s.npairs] = i
                s.npairs += 1
                cx[j] += 1
                cy[i] += 1
                _rec(s, k + 1, new, dx, dy, ex, ey, oside, oidx, cx, cy, px, py, bx, by, bn)
                s.npairs -= 1
                cx[j] -= 1
                cy[i] -= 1


def gh_search(dx_in, dy_in, order, best, seed_pairs):
    cdef int64_t[:, ::1] dx = np.ascontiguousarray(dx_in, dtype=np.int64)
    cdef int64_t[:, ::1] dy = np.ascontiguousarray(dy_in, dtype=np.int64)
    cdef Search s
    s.n = dx.shape[0]
    s.m = dy.shape[0]
    s.nord = len(order)
    s.found = 0
    s.best = best
    cap = s.n + s.m + len(seed_pairs) + 1
    cdef int64_t[::1] ex = np.asarray(dx_in, dtype=np.int64).max(axis=1)
    cdef int64_t[::1] ey = np.asarray(dy_in, dtype=np.int64).max(axis=1)
    cdef int[::1] oside = np.array([o[0] for o in order], dtype=np.intc)
    cdef int[::1] oidx = np.array([o[1] for o in order], dtype=np.intc)
    cdef int[::1] cx = np.zeros(s.n, dtype=np.intc)
    cdef int[::1] cy = np.zeros(s.m, dtype=np.intc)
    cdef int[::1] px = np.zeros(cap, dtype=np.intc)
    cdef int[::1] py = np.zeros(cap, dtype=np.intc)
    cdef int[::1] bx = np.zeros(cap, dtype=np.intc)
    cdef int[::1] by = np.zeros(cap, dtype=np.intc)
    cdef int bn = 0
    cdef int a, b
    cdef int64_t cur0 = 0
    s.npairs = 0
    for x, y in seed_pairs:
        px[s.npairs] = x
        py[s.npairs] = y
        s.npairs += 1
        cx[x] += 1
        cy[y] += 1
    for a in range(s.npairs):
        for b in range(a):
            cur0 = max(cur0, iabs(dx[px[a], px[b]] - dy[py[a], py[b]]))
    if cur0 < s.best:
        _rec(&s, 0, cur0, dx, dy, ex, ey, oside, oidx, cx, cy, px, py, bx, by, &bn)
    if not s.found:
        return int(s.best), None
    return int(s.best), [(int(bx[a]), int(by[a])) for a in range(bn)]
