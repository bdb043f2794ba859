"""Density-based hierarchical clustering with per-document membership strengths.

Pipeline: cosine distance -> core distances -> mutual-reachability minimum
spanning tree -> single-linkage hierarchy -> condensed tree -> excess-of-mass
cluster selection -> flat labels plus membership probabilities.  Documents that
never join a stable cluster are assigned ``NOISE`` with membership 0.0.

The whole pipeline is deterministic: documents are processed in ascending-id
order internally, so permuting the input order yields the same partition and
the same membership value per id.  Cluster indices are assigned by ascending
smallest member id.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from idsel import kernels
from idsel.errors import ValidationError
from idsel.geometry import EmbeddingSet

NOISE = -1

DEFAULT_MIN_SAMPLES = 5


@dataclass(frozen=True)
class ClusterParams:
    """Hyperparameters for the density clusterer."""

    min_cluster_size: int
    min_samples: int = DEFAULT_MIN_SAMPLES

    def __post_init__(self) -> None:
        if self.min_cluster_size < 2:
            raise ValidationError(
                f"min_cluster_size must be >= 2, got {self.min_cluster_size}"
            )
        if self.min_samples < 1:
            raise ValidationError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.min_samples > self.min_cluster_size:
            raise ValidationError(
                f"min_samples ({self.min_samples}) must not exceed "
                f"min_cluster_size ({self.min_cluster_size})"
            )


def default_params(n_documents: int) -> ClusterParams:
    """Default hyperparameters scaled to corpus size."""
    return ClusterParams(
        min_cluster_size=max(5, n_documents // 100),
        min_samples=DEFAULT_MIN_SAMPLES,
    )


@dataclass(frozen=True)
class ClusterModel:
    """Flat clustering: label and membership strength per document id.

    ``assignments`` maps each id to a cluster index or ``NOISE``;
    ``membership`` maps each id to a probability in [0, 1] (exactly 0.0 for
    noise); ``cluster_sizes`` counts members per non-noise cluster.
    """

    assignments: dict[str, int]
    membership: dict[str, float]
    cluster_sizes: dict[int, int]
    params: ClusterParams
    condensed_tree: tuple[tuple[int, int, float, int], ...] = field(repr=False)
    point_order: tuple[str, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if set(self.assignments) != set(self.membership):
            raise ValidationError("assignments and membership cover different ids")
        counted: dict[int, int] = defaultdict(int)
        for doc_id, cluster in self.assignments.items():
            strength = self.membership[doc_id]
            if not 0.0 <= strength <= 1.0:
                raise ValidationError(
                    f"membership for {doc_id!r} outside [0, 1]: {strength}"
                )
            if cluster == NOISE:
                if strength != 0.0:
                    raise ValidationError(
                        f"noise document {doc_id!r} has nonzero membership {strength}"
                    )
            else:
                counted[cluster] += 1
        if dict(counted) != dict(self.cluster_sizes):
            raise ValidationError("cluster_sizes inconsistent with assignments")

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    def members(self, cluster: int) -> list[str]:
        """Ids assigned to ``cluster`` (``NOISE`` allowed), ascending."""
        return sorted(i for i, c in self.assignments.items() if c == cluster)


def mutual_reachability(dist: np.ndarray, core: np.ndarray) -> np.ndarray:
    """max(core(a), core(b), dist(a, b)) for every pair."""
    return np.maximum(np.maximum.outer(core, core), dist)


def hdbscan(
    emb: EmbeddingSet,
    ids: list[str] | None = None,
    params: ClusterParams | None = None,
    threads: int = 1,
) -> ClusterModel:
    """Cluster the given documents by embedding density.

    ``ids`` defaults to every embedded id.  Requires at least
    ``min_cluster_size`` documents and strictly more documents than
    ``min_samples`` (the core distance is the distance to the
    ``min_samples``-th nearest other point).
    """
    chosen = emb.ids() if ids is None else list(ids)
    if params is None:
        params = default_params(len(chosen))
    order = sorted(chosen)
    if len(set(order)) != len(order):
        raise ValidationError("duplicate ids passed to hdbscan")
    n = len(order)
    if n < params.min_cluster_size:
        raise ValidationError(
            f"need at least min_cluster_size={params.min_cluster_size} documents, got {n}"
        )
    if n <= params.min_samples:
        raise ValidationError(
            f"need more than min_samples={params.min_samples} documents, got {n}"
        )

    rows = emb.rows_for(order)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    unit = np.ascontiguousarray(rows / norms)
    sim = kernels.pairwise_cosine(unit, threads=threads)
    dist = np.clip(1.0 - sim, 0.0, None)
    if not np.all(np.isfinite(dist)):
        raise ValidationError("non-finite pairwise distances")

    core = np.ascontiguousarray(
        np.partition(dist, params.min_samples, axis=1)[:, params.min_samples]
    )
    edges = kernels.prim_mst(dist, core)
    linkage = _single_linkage(edges, n)
    tree = _condense(linkage, n, params.min_cluster_size)
    labels, strengths = _flat_clusters(tree, n)

    remap = _final_indices(labels, n)
    assignments: dict[str, int] = {}
    membership: dict[str, float] = {}
    sizes: dict[int, int] = defaultdict(int)
    for pos, doc_id in enumerate(order):
        raw = labels[pos]
        if raw == NOISE:
            assignments[doc_id] = NOISE
            membership[doc_id] = 0.0
        else:
            cluster = remap[raw]
            assignments[doc_id] = cluster
            membership[doc_id] = strengths[pos]
            sizes[cluster] += 1
    return ClusterModel(
        assignments=assignments,
        membership=membership,
        cluster_sizes=dict(sizes),
        params=params,
        condensed_tree=tuple(tree),
        point_order=tuple(order),
    )


def order_clusters(model: ClusterModel) -> list[int]:
    """Cluster indices by size descending, ties by ascending index."""
    return sorted(model.cluster_sizes, key=lambda c: (-model.cluster_sizes[c], c))


def dump_condensed_tree(model: ClusterModel, path: str) -> None:
    """Debug dump of the condensed tree as JSON lines.

    Point children are written as their document id, cluster children as
    integer node labels.
    """
    n = len(model.point_order)
    with open(path, "w", encoding="utf-8") as handle:
        for parent, child, lam, size in model.condensed_tree:
            row = {
                "parent": parent,
                "child": model.point_order[child] if child < n else child,
                "lambda": lam if math.isfinite(lam) else "inf",
                "size": size,
            }
            handle.write(json.dumps(row) + "\n")


def _find(parent: np.ndarray, x: int) -> int:
    root = x
    while parent[root] >= 0:
        root = int(parent[root])
    while parent[x] >= 0:
        parent[x], x = root, int(parent[x])
    return root


def _single_linkage(edges: np.ndarray, n: int) -> np.ndarray:
    """Merge MST edges ascending by weight into a dendrogram.

    Row k records (left node, right node, weight, merged size); the merge
    creates node n + k.  Equal weights break ties by (smaller endpoint,
    larger endpoint) so the hierarchy is deterministic.
    """
    order = np.lexsort((edges[:, 1], edges[:, 0], edges[:, 2]))
    parent = np.full(2 * n - 1, -1, dtype=np.intp)
    size = np.ones(2 * n - 1, dtype=np.intp)
    linkage = np.empty((n - 1, 4), dtype=np.float64)
    next_label = n
    for k, idx in enumerate(order):
        u, v, w = int(edges[idx, 0]), int(edges[idx, 1]), float(edges[idx, 2])
        ru, rv = _find(parent, u), _find(parent, v)
        linkage[k] = (ru, rv, w, size[ru] + size[rv])
        parent[ru] = parent[rv] = next_label
        size[next_label] = size[ru] + size[rv]
        next_label += 1
    return linkage


def _subtree_nodes(linkage: np.ndarray, n: int, start: int) -> list[int]:
    """All nodes (internal and leaves) below and including ``start``, level order."""
    out: list[int] = []
    frontier = [start]
    while frontier:
        out.extend(frontier)
        internal = [x - n for x in frontier if x >= n]
        frontier = []
        for row in internal:
            frontier.append(int(linkage[row, 0]))
            frontier.append(int(linkage[row, 1]))
    return out


def _condense(
    linkage: np.ndarray, n: int, min_cluster_size: int
) -> list[tuple[int, int, float, int]]:
    """Collapse the dendrogram into (parent, child, lambda, size) rows.

    A merge node splits into two child clusters only when both sides have at
    least ``min_cluster_size`` points; otherwise the undersized side's points
    fall out of the parent cluster individually at lambda = 1/distance.
    Cluster node labels start at ``n`` (the root); points keep labels < n.
    """
    root = 2 * n - 2
    relabel = {root: n}
    next_label = n + 1
    ignore: set[int] = set()
    rows: list[tuple[int, int, float, int]] = []

    for node in _subtree_nodes(linkage, n, root):
        if node < n or node in ignore:
            continue
        left = int(linkage[node - n, 0])
        right = int(linkage[node - n, 1])
        distance = float(linkage[node - n, 2])
        lam = 1.0 / distance if distance > 0.0 else math.inf
        left_count = int(linkage[left - n, 3]) if left >= n else 1
        right_count = int(linkage[right - n, 3]) if right >= n else 1
        label = relabel[node]

        if left_count >= min_cluster_size and right_count >= min_cluster_size:
            relabel[left] = next_label
            next_label += 1
            rows.append((label, relabel[left], lam, left_count))
            relabel[right] = next_label
            next_label += 1
            rows.append((label, relabel[right], lam, right_count))
        elif left_count < min_cluster_size and right_count < min_cluster_size:
            for side in (left, right):
                for sub in _subtree_nodes(linkage, n, side):
                    if sub < n:
                        rows.append((label, sub, lam, 1))
                    ignore.add(sub)
        else:
            keep, shed = (right, left) if left_count < min_cluster_size else (left, right)
            relabel[keep] = label
            for sub in _subtree_nodes(linkage, n, shed):
                if sub < n:
                    rows.append((label, sub, lam, 1))
                ignore.add(sub)
    return rows


def _flat_clusters(
    tree: list[tuple[int, int, float, int]], n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Excess-of-mass cluster selection, then labels and membership strengths.

    Infinite lambda values (zero-distance merges) are capped at twice the
    largest finite lambda so stability sums stay finite; the capping preserves
    every comparison the selection makes.  The root competes only when the
    condensed tree contains no other cluster; in that single-cluster case a
    point belongs to the root cluster only if it persists to the root's death
    lambda, which keeps far outliers labeled as noise.
    """
    finite = [lam for _, _, lam, _ in tree if math.isfinite(lam)]
    sentinel = 2.0 * max(finite) if finite else 1.0

    def cap(lam: float) -> float:
        return lam if math.isfinite(lam) else sentinel

    birth: dict[int, float] = {n: 0.0}
    children: dict[int, list[int]] = defaultdict(list)
    point_lambda = np.zeros(n, dtype=np.float64)
    point_parent = np.full(n, n, dtype=np.intp)
    for parent, child, lam, _size in tree:
        if child >= n:
            birth[child] = cap(lam)
            children[parent].append(child)
        else:
            point_lambda[child] = cap(lam)
            point_parent[child] = parent

    stability: dict[int, float] = {c: 0.0 for c in birth}
    for parent, _child, lam, size in tree:
        stability[parent] += (cap(lam) - birth[parent]) * size

    # Bottom-up: a cluster survives when it is more stable than the sum of
    # its child clusters; otherwise the children inherit its mass.  The root
    # is excluded, matching the convention that the full data set is not a
    # cluster unless nothing else qualifies.
    candidates = sorted((c for c in stability if c != n), reverse=True)
    selected_flag = {c: True for c in candidates}
    for node in candidates:
        subtree = sum(stability[c] for c in children.get(node, ()))
        if subtree > stability[node]:
            selected_flag[node] = False
            stability[node] = subtree
        else:
            queue = list(children.get(node, ()))
            while queue:
                sub = queue.pop()
                selected_flag[sub] = False
                queue.extend(children.get(sub, ()))
    selected = {c for c, flag in selected_flag.items() if flag}
    root_only = not selected
    if root_only:
        selected = {n}

    deaths: dict[int, float] = defaultdict(float)
    for parent, _child, lam, _size in tree:
        deaths[parent] = max(deaths[parent], cap(lam))

    up = {child: parent for parent, child, _lam, _size in tree if child >= n}
    labels = np.full(n, NOISE, dtype=np.intp)
    strengths = np.zeros(n, dtype=np.float64)
    owner_cache: dict[int, int | None] = {}

    def owner(cluster: int) -> int | None:
        seen = []
        found: int | None = None
        node: int | None = cluster
        while node is not None:
            if node in owner_cache:
                found = owner_cache[node]
                break
            if node in selected:
                found = node
                break
            seen.append(node)
            node = up.get(node)
        for s in seen:
            owner_cache[s] = found
        return found

    for point in range(n):
        cluster = owner(int(point_parent[point]))
        if cluster is None:
            continue
        if root_only and point_lambda[point] < deaths[n]:
            continue
        labels[point] = cluster
        death = deaths[cluster]
        strengths[point] = 1.0 if death <= 0.0 else min(point_lambda[point], death) / death
    return labels, strengths


def _final_indices(labels: np.ndarray, n: int) -> dict[int, int]:
    """Map raw selected-cluster labels to 0..k-1 by ascending first member."""
    remap: dict[int, int] = {}
    for point in range(n):
        raw = int(labels[point])
        if raw != NOISE and raw not in remap:
            remap[raw] = len(remap)
    return remap
