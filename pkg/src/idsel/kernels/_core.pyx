# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: pairwise cosine, Prim MST, farthest-first scan.

Decision logic (tie-breaks, strict-minimum tracking) matches
idsel.kernels.pure exactly; see that module for the contracts.
"""

import threading

import numpy as np

cdef extern from "math.h":
    double INFINITY


cdef void _cosine_rows(const double[:, ::1] unit, double[:, ::1] out,
                       Py_ssize_t start, Py_ssize_t stop) noexcept nogil:
    cdef Py_ssize_t n = unit.shape[0]
    cdef Py_ssize_t d = unit.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(start, stop):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                acc += unit[i, k] * unit[j, k]
            out[i, j] = acc
            out[j, i] = acc
        out[i, i] = 1.0


def _cosine_block(const double[:, ::1] unit, double[:, ::1] out,
                  Py_ssize_t start, Py_ssize_t stop):
    with nogil:
        _cosine_rows(unit, out, start, stop)


def pairwise_cosine(unit, threads=1):
    unit = np.ascontiguousarray(unit, dtype=np.float64)
    n = unit.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    if n == 0:
        return out
    nthreads = max(1, min(int(threads), n))
    if nthreads == 1:
        _cosine_block(unit, out, 0, n)
        return out
    # Disjoint row ranges: every cell has exactly one writer, so the result
    # is identical to the sequential computation for any schedule.
    bounds = np.linspace(0, n, nthreads + 1).astype(np.int64)
    workers = [
        threading.Thread(target=_cosine_block, args=(unit, out, int(a), int(b)))
        for a, b in zip(bounds[:-1], bounds[1:])
    ]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    return out


def prim_mst(dist, core):
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    core = np.ascontiguousarray(core, dtype=np.float64)
    cdef Py_ssize_t n = dist.shape[0]
    edges = np.empty((max(n - 1, 0), 3), dtype=np.float64)
    if n < 2:
        return edges
    best_arr = np.empty(n, dtype=np.float64)
    src_arr = np.zeros(n, dtype=np.int64)
    in_tree_arr = np.zeros(n, dtype=np.uint8)

    cdef const double[:, ::1] d = dist
    cdef const double[::1] c = core
    cdef double[:, ::1] e = edges
    cdef double[::1] best = best_arr
    cdef long long[::1] src = src_arr
    cdef unsigned char[::1] in_tree = in_tree_arr
    cdef Py_ssize_t i, j, k, v
    cdef double w, cv

    with nogil:
        in_tree[0] = 1
        for j in range(n):
            w = d[0, j]
            if c[0] > w:
                w = c[0]
            if c[j] > w:
                w = c[j]
            best[j] = w
        best[0] = INFINITY
        for k in range(n - 1):
            v = 0
            w = INFINITY
            for j in range(n):
                if in_tree[j] == 0 and best[j] < w:
                    w = best[j]
                    v = j
            e[k, 0] = <double> src[v]
            e[k, 1] = <double> v
            e[k, 2] = best[v]
            in_tree[v] = 1
            best[v] = INFINITY
            cv = c[v]
            for j in range(n):
                if in_tree[j] == 0:
                    w = d[v, j]
                    if cv > w:
                        w = cv
                    if c[j] > w:
                        w = c[j]
                    if w < best[j]:
                        best[j] = w
                        src[j] = v
    return edges


def rss_scan(sim):
    sim = np.ascontiguousarray(sim, dtype=np.float64)
    cdef Py_ssize_t n = sim.shape[0]
    if n < 2:
        raise ValueError("rss_scan requires at least 2 points")
    order = np.empty(n, dtype=np.int64)
    selected_arr = np.zeros(n, dtype=np.uint8)
    maxsim_arr = np.empty(n, dtype=np.float64)

    cdef const double[:, ::1] s = sim
    cdef long long[::1] o = order
    cdef unsigned char[::1] sel = selected_arr
    cdef double[::1] ms = maxsim_arr
    cdef Py_ssize_t i, j, k, c, bi, bj
    cdef double best, v

    with nogil:
        bi = 0
        bj = 1
        best = s[0, 1]
        for i in range(n):
            for j in range(i + 1, n):
                if s[i, j] < best:
                    best = s[i, j]
                    bi = i
                    bj = j
        o[0] = bi
        o[1] = bj
        sel[bi] = 1
        sel[bj] = 1
        for j in range(n):
            v = s[bi, j]
            if s[bj, j] > v:
                v = s[bj, j]
            ms[j] = v
        for k in range(2, n):
            c = 0
            best = INFINITY
            for j in range(n):
                if sel[j] == 0 and ms[j] < best:
                    best = ms[j]
                    c = j
            o[k] = c
            sel[c] = 1
            for j in range(n):
                if s[c, j] > ms[j]:
                    ms[j] = s[c, j]
    return order
