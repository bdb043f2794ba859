"""Numpy implementations of the hot kernels.

This is the fallback used when the compiled extension is unavailable. Both
backends make the same discrete decisions: argmin/argmax ties resolve to the
lowest index, and minima are tracked with strict comparisons, so orderings
and tree topologies agree between backends.
"""

from __future__ import annotations

import numpy as np


def pairwise_cosine(unit: np.ndarray, threads: int = 1) -> np.ndarray:
    """All-pairs dot products of unit rows, mirrored from the upper triangle.

    ``threads`` is accepted for interface parity with the compiled backend;
    numpy delegates its own parallelism to BLAS, and a single product call
    keeps the output independent of the argument by construction.
    """
    unit = np.ascontiguousarray(unit, dtype=np.float64)
    full = unit @ unit.T
    upper = np.triu(full, 1)
    values = upper + upper.T
    np.fill_diagonal(values, 1.0)
    return values


def prim_mst(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    """Minimum spanning tree of the mutual reachability graph.

    Edge weight between i and j is max(core[i], core[j], dist[i, j]).
    Returns an (n-1, 3) array of [u, v, weight] rows in discovery order,
    starting from vertex 0. Ties pick the lowest-index vertex.
    """
    dist = np.asarray(dist, dtype=np.float64)
    core = np.asarray(core, dtype=np.float64)
    n = dist.shape[0]
    if n < 2:
        return np.empty((0, 3), dtype=np.float64)
    mreach = np.maximum(np.maximum.outer(core, core), dist)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = mreach[0].copy()
    best[0] = np.inf
    src = np.zeros(n, dtype=np.int64)
    edges = np.empty((n - 1, 3), dtype=np.float64)
    for k in range(n - 1):
        v = int(np.argmin(best))
        edges[k, 0] = src[v]
        edges[k, 1] = v
        edges[k, 2] = best[v]
        in_tree[v] = True
        row = mreach[v]
        update = (row < best) & ~in_tree
        best = np.where(update, row, best)
        src = np.where(update, v, src)
        best[v] = np.inf
    return edges


def rss_scan(sim: np.ndarray) -> np.ndarray:
    """Farthest-first traversal order over a similarity matrix.

    Seeds with the least-similar pair (scanning i < j row-major, first
    minimum wins), then repeatedly emits the point whose maximum similarity
    to the emitted set is smallest.
    """
    sim = np.asarray(sim, dtype=np.float64)
    n = sim.shape[0]
    if n < 2:
        raise ValueError("rss_scan requires at least 2 points")
    iu, ju = np.triu_indices(n, 1)
    flat_min = int(np.argmin(sim[iu, ju]))
    i0, j0 = int(iu[flat_min]), int(ju[flat_min])
    order = np.empty(n, dtype=np.int64)
    order[0], order[1] = i0, j0
    selected = np.zeros(n, dtype=bool)
    selected[i0] = selected[j0] = True
    maxsim = np.maximum(sim[i0], sim[j0])
    for k in range(2, n):
        cand = np.where(selected, np.inf, maxsim)
        c = int(np.argmin(cand))
        order[k] = c
        selected[c] = True
        maxsim = np.maximum(maxsim, sim[c])
    return order
