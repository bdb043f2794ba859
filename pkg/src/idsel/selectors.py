"""The four document-ordering strategies: random, rss, oc, lls.

Each selector is a pure function producing a :class:`SelectionOrder` — the
full corpus rearranged for annotation (random, rss, oc) or a filtered
rearrangement (lls, which may drop lexically redundant documents).

Determinism contract: every tie anywhere breaks by ascending document id, and
stochastic selectors draw from a generator seeded explicitly, so equal inputs
always produce byte-equal orders.
"""

from __future__ import annotations

import random as _random
from collections import deque
from dataclasses import dataclass

from idsel import kernels
from idsel.clustering import NOISE, ClusterModel, ClusterParams, order_clusters
from idsel.corpus import Corpus
from idsel.errors import ValidationError
from idsel.geometry import EmbeddingSet, SimilarityMatrix, similarity_matrix
from idsel.lexical import Comparator, LexicalParams, bleu

METHODS = ("random", "rss", "oc", "lls")
STOCHASTIC_METHODS = ("random", "lls")
LLS_MODES = ("previous_only", "all_kept")

DEFAULT_BETA = 0.4


@dataclass(frozen=True)
class SelectionOrder:
    """An ordered list of document ids produced by one selection method."""

    method: str
    ranked_ids: tuple[str, ...]
    params_fingerprint: str
    truncated: bool = False

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}")
        if len(set(self.ranked_ids)) != len(self.ranked_ids):
            raise ValidationError("ranked_ids contains duplicates")
        if self.truncated and self.method != "lls":
            raise ValidationError(f"{self.method} orders cannot be truncated")

    def __len__(self) -> int:
        return len(self.ranked_ids)


def _corpus_ids(corpus: Corpus) -> list[str]:
    ids = sorted(corpus.ids())
    if not ids:
        raise ValidationError("corpus is empty")
    return ids


def random_order(corpus: Corpus, seed: int) -> SelectionOrder:
    """Uniform random permutation of the corpus, reproducible from ``seed``."""
    ids = _corpus_ids(corpus)
    _random.Random(seed).shuffle(ids)
    return SelectionOrder(
        method="random",
        ranked_ids=tuple(ids),
        params_fingerprint=f"method=random seed={seed}",
    )


def rss_order(corpus: Corpus, sim: SimilarityMatrix) -> SelectionOrder:
    """Farthest-first traversal: start at the least similar pair, then always
    take the document whose maximum similarity to the already-selected set is
    smallest."""
    ids = _corpus_ids(corpus)
    if len(ids) < 2:
        raise ValidationError("rss needs at least 2 documents")
    block = sim.submatrix(ids)
    positions = kernels.rss_scan(block)
    return SelectionOrder(
        method="rss",
        ranked_ids=tuple(ids[p] for p in positions),
        params_fingerprint="method=rss aggregation=max",
    )


def oc_order(corpus: Corpus, model: ClusterModel) -> SelectionOrder:
    """Round-robin over clusters from largest to smallest, popping the
    lowest-membership member each visit; noise documents form a pseudo-cluster
    visited last in every round."""
    ids = _corpus_ids(corpus)
    missing = [i for i in ids if i not in model.assignments]
    if missing:
        raise ValidationError(f"ids without cluster assignment: {missing[:5]}")

    queues: dict[int, deque[str]] = {}
    for cluster in order_clusters(model):
        members = [i for i in ids if model.assignments[i] == cluster]
        members.sort(key=lambda i: (model.membership[i], i))
        queues[cluster] = deque(members)
    noise = deque(sorted(i for i in ids if model.assignments[i] == NOISE))
    if noise:
        queues[NOISE] = noise

    visit = list(queues)
    ranked: list[str] = []
    while len(ranked) < len(ids):
        for cluster in visit:
            queue = queues[cluster]
            if queue:
                ranked.append(queue.popleft())
    params = model.params
    return SelectionOrder(
        method="oc",
        ranked_ids=tuple(ranked),
        params_fingerprint=(
            f"method=oc min_cluster_size={params.min_cluster_size} "
            f"min_samples={params.min_samples}"
        ),
    )


def lls_order(
    corpus: Corpus,
    beta: float = DEFAULT_BETA,
    params: LexicalParams | None = None,
    seed: int = 0,
    mode: str = "previous_only",
    comparator: Comparator | None = None,
) -> SelectionOrder:
    """Seeded shuffle, then a single pass keeping each document only if its
    lexical similarity stays at or below ``beta``.

    ``previous_only`` compares against the most recently kept document;
    ``all_kept`` against the maximum over everything kept so far.  The
    comparator defaults to sentence BLEU and may be swapped for any
    ``(candidate, reference) -> float`` function.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must be in [0, 1], got {beta}")
    if mode not in LLS_MODES:
        raise ValidationError(f"mode must be one of {LLS_MODES}, got {mode!r}")
    if params is None:
        params = LexicalParams()
    if comparator is None:
        def comparator(a, b, _p=params):  # noqa: E731 - default comparator
            return bleu(a, b, _p)

    ids = _corpus_ids(corpus)
    _random.Random(seed).shuffle(ids)

    kept: list[str] = []
    for doc_id in ids:
        doc = corpus.get(doc_id)
        if not kept:
            kept.append(doc_id)
            continue
        if mode == "previous_only":
            score = comparator(doc, corpus.get(kept[-1]))
        else:
            score = max(comparator(doc, corpus.get(k)) for k in kept)
        if score > beta:
            continue
        kept.append(doc_id)
    return SelectionOrder(
        method="lls",
        ranked_ids=tuple(kept),
        params_fingerprint=(
            f"method=lls beta={beta} mode={mode} seed={seed} "
            f"max_ngram={params.max_ngram} smoothing={params.smoothing}"
        ),
        truncated=len(kept) < len(ids),
    )


def build_order(
    method: str,
    corpus: Corpus,
    emb: EmbeddingSet | None = None,
    seed: int = 0,
    beta: float = DEFAULT_BETA,
    lexical_params: LexicalParams | None = None,
    lls_mode: str = "previous_only",
    cluster_model: ClusterModel | None = None,
    cluster_params: ClusterParams | None = None,
    threads: int = 1,
) -> SelectionOrder:
    """Dispatch to the selector named ``method``, computing what it needs.

    rss derives the similarity matrix from ``emb``; oc accepts a prebuilt
    ``cluster_model`` (to amortize clustering across repeats) or clusters
    ``emb`` itself, with ``cluster_params`` or size-scaled defaults.
    """
    if method == "random":
        return random_order(corpus, seed)
    if method == "rss":
        if emb is None:
            raise ValidationError("rss requires embeddings")
        ids = sorted(corpus.ids())
        return rss_order(corpus, similarity_matrix(emb, ids, threads=threads))
    if method == "oc":
        if cluster_model is None:
            if emb is None:
                raise ValidationError("oc requires embeddings or a cluster model")
            from idsel.clustering import hdbscan

            cluster_model = hdbscan(
                emb, ids=sorted(corpus.ids()), params=cluster_params, threads=threads
            )
        return oc_order(corpus, cluster_model)
    if method == "lls":
        return lls_order(
            corpus, beta=beta, params=lexical_params, seed=seed, mode=lls_mode
        )
    raise ValidationError(f"unknown method {method!r}")
