"""Ordering strategies: brute-force oracles, invariants, and determinism."""

import math
import random
from collections import Counter, defaultdict

import numpy as np
import pytest

from idsel.clustering import NOISE, ClusterModel, ClusterParams
from idsel.corpus import Corpus, Document
from idsel.errors import ValidationError
from idsel.geometry import EmbeddingSet, similarity_matrix
from idsel.selectors import (
    SelectionOrder,
    build_order,
    lls_order,
    oc_order,
    random_order,
    rss_order,
)

from fixgen import random_embeddings


def corpus_of(ids, texts=None) -> Corpus:
    return Corpus(
        documents=tuple(
            Document(id=i, text=(texts[i] if texts else f"text for {i}"))
            for i in ids
        )
    )


def cluster_model(assignments: dict[str, int], membership: dict[str, float]) -> ClusterModel:
    sizes = Counter(c for c in assignments.values() if c != NOISE)
    return ClusterModel(
        assignments=assignments,
        membership=membership,
        cluster_sizes=dict(sizes),
        params=ClusterParams(min_cluster_size=2, min_samples=1),
        condensed_tree=(),
        point_order=tuple(sorted(assignments)),
    )


# --- SelectionOrder -------------------------------------------------------


def test_selection_order_validation():
    with pytest.raises(ValidationError):
        SelectionOrder(method="bogus", ranked_ids=("a",), params_fingerprint="")
    with pytest.raises(ValidationError):
        SelectionOrder(method="random", ranked_ids=("a", "a"), params_fingerprint="")
    with pytest.raises(ValidationError):
        SelectionOrder(
            method="random", ranked_ids=("a",), params_fingerprint="", truncated=True
        )
    order = SelectionOrder(method="lls", ranked_ids=("a", "b"), params_fingerprint="x")
    assert len(order) == 2


# --- random ---------------------------------------------------------------


def test_random_order_is_deterministic_and_a_permutation():
    corpus = corpus_of([f"d{i}" for i in range(20)])
    a = random_order(corpus, seed=7)
    b = random_order(corpus, seed=7)
    assert a == b
    assert sorted(a.ranked_ids) == sorted(corpus.ids())
    assert random_order(corpus, seed=8).ranked_ids != a.ranked_ids


def test_random_order_single_document():
    corpus = corpus_of(["only"])
    assert random_order(corpus, seed=0).ranked_ids == ("only",)


def test_random_order_rejects_empty_corpus():
    with pytest.raises(ValidationError):
        random_order(Corpus(documents=()), seed=0)


def test_random_order_ignores_document_listing_order():
    ids = [f"d{i}" for i in range(10)]
    forward = corpus_of(ids)
    backward = corpus_of(list(reversed(ids)))
    assert random_order(forward, seed=3) == random_order(backward, seed=3)


def test_random_first_position_is_uniform_across_seeds():
    ids = ["v", "w", "x", "y", "z"]
    corpus = corpus_of(ids)
    firsts = Counter(random_order(corpus, seed).ranked_ids[0] for seed in range(10000))
    for doc_id in ids:
        assert abs(firsts[doc_id] / 10000 - 0.2) <= 0.02


# --- rss ------------------------------------------------------------------


def brute_force_rss(ids, value):
    """Independent re-derivation of the greedy max-min traversal."""
    ids = sorted(ids)
    best = None
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            key = (value(ids[i], ids[j]), ids[i], ids[j])
            if best is None or key < best:
                best = key
    selected = [best[1], best[2]]
    remaining = [i for i in ids if i not in selected]
    while remaining:
        _, pick = min((max(value(c, s) for s in selected), c) for c in remaining)
        selected.append(pick)
        remaining.remove(pick)
    return selected


def test_rss_two_documents_emit_smaller_id_first():
    emb = EmbeddingSet.from_mapping(
        {"y": np.array([1.0, 0.0], dtype=np.float32), "x": np.array([0.0, 1.0], dtype=np.float32)}
    )
    corpus = corpus_of(["y", "x"])
    order = rss_order(corpus, similarity_matrix(emb, ["x", "y"]))
    assert order.ranked_ids == ("x", "y")


def test_rss_analytic_three_point_example():
    # Unit vectors at 0, 5 and 90 degrees: the least similar pair is (a, c)
    # with cosine 0; b is then closer to a (cos 5) than to c (cos 85).
    theta = math.radians(5.0)
    emb = EmbeddingSet.from_mapping(
        {
            "a": np.array([1.0, 0.0], dtype=np.float32),
            "b": np.array([math.cos(theta), math.sin(theta)], dtype=np.float32),
            "c": np.array([0.0, 1.0], dtype=np.float32),
        }
    )
    corpus = corpus_of(["a", "b", "c"])
    order = rss_order(corpus, similarity_matrix(emb, ["a", "b", "c"]))
    assert order.ranked_ids == ("a", "c", "b")


@pytest.mark.parametrize("seed", range(12))
def test_rss_matches_brute_force_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 9)
    emb = random_embeddings(n, dim=4, seed=seed)
    ids = emb.ids()
    corpus = corpus_of(ids)
    sim = similarity_matrix(emb, ids)
    order = rss_order(corpus, sim)
    assert list(order.ranked_ids) == brute_force_rss(ids, sim.value)


@pytest.mark.parametrize("seed", range(6))
def test_rss_step_optimality_and_prefix_monotonicity(seed):
    emb = random_embeddings(8, dim=3, seed=100 + seed)
    ids = emb.ids()
    corpus = corpus_of(ids)
    sim = similarity_matrix(emb, ids)
    ranked = list(rss_order(corpus, sim).ranked_ids)
    prev_extreme = None
    for k in range(2, len(ranked)):
        prefix, pick = ranked[:k], ranked[k]
        remaining = [i for i in ids if i not in prefix]
        closeness = {c: max(sim.value(c, s) for s in prefix) for c in remaining}
        best = min(closeness.values())
        assert closeness[pick] == best
        assert pick == min(c for c in remaining if closeness[c] == best)
        extreme = max(
            sim.value(a, b) for i, a in enumerate(prefix) for b in prefix[i + 1 :]
        )
        if prev_extreme is not None:
            assert extreme >= prev_extreme - 1e-12
        prev_extreme = extreme


def test_rss_ignores_document_and_matrix_listing_order():
    emb = random_embeddings(7, dim=4, seed=5)
    ids = emb.ids()
    corpus_fwd = corpus_of(ids)
    corpus_rev = corpus_of(list(reversed(ids)))
    sim_fwd = similarity_matrix(emb, ids)
    sim_rev = similarity_matrix(emb, list(reversed(ids)))
    assert rss_order(corpus_fwd, sim_fwd) == rss_order(corpus_rev, sim_rev)


def test_rss_errors():
    emb = random_embeddings(3, dim=4, seed=0)
    ids = emb.ids()
    with pytest.raises(ValidationError):
        rss_order(corpus_of(ids[:1]), similarity_matrix(emb, ids))
    with pytest.raises(ValidationError):
        rss_order(corpus_of(ids), similarity_matrix(emb, ids[:2]))


# --- oc -------------------------------------------------------------------


def simulate_rounds(assignments, membership):
    """Independent replay of the pop-per-round rule."""
    clusters = defaultdict(list)
    for doc_id in sorted(assignments):
        clusters[assignments[doc_id]].append(doc_id)
    real = sorted(
        (c for c in clusters if c != NOISE), key=lambda c: (-len(clusters[c]), c)
    )
    visit = real + ([NOISE] if NOISE in clusters else [])
    for c in visit:
        clusters[c].sort(key=lambda d: (membership[d], d))
    out = []
    while any(clusters[c] for c in visit):
        for c in visit:
            if clusters[c]:
                out.append(clusters[c].pop(0))
    return out


def test_oc_pops_lowest_membership_per_cluster_per_round():
    assignments = {"x": 0, "y": 0, "z": 1}
    membership = {"x": 0.2, "y": 0.9, "z": 0.5}
    model = cluster_model(assignments, membership)
    order = oc_order(corpus_of(["x", "y", "z"]), model)
    assert order.ranked_ids == ("x", "z", "y")


def test_oc_all_noise_falls_back_to_ascending_ids():
    ids = ["m", "k", "a", "z", "q"]
    model = cluster_model({i: NOISE for i in ids}, {i: 0.0 for i in ids})
    order = oc_order(corpus_of(ids), model)
    assert order.ranked_ids == ("a", "k", "m", "q", "z")


@pytest.mark.parametrize("seed", range(10))
def test_oc_matches_independent_round_simulation(seed):
    rng = random.Random(1000 + seed)
    n = rng.randint(4, 12)
    ids = [f"n{i:02d}" for i in range(n)]
    assignments, membership = {}, {}
    for doc_id in ids:
        cluster = rng.choice([0, 1, 2, NOISE])
        assignments[doc_id] = cluster
        membership[doc_id] = 0.0 if cluster == NOISE else rng.randint(0, 4) / 4
    model = cluster_model(assignments, membership)
    order = oc_order(corpus_of(ids), model)
    assert list(order.ranked_ids) == simulate_rounds(assignments, membership)


def test_oc_round_structure_and_membership_monotonicity():
    rng = random.Random(99)
    ids = [f"r{i:02d}" for i in range(18)]
    assignments = {i: rng.choice([0, 1, 2]) for i in ids}
    membership = {i: rng.randint(0, 9) / 10 for i in ids}
    model = cluster_model(assignments, membership)
    ranked = list(oc_order(corpus_of(ids), model).ranked_ids)

    emitted = [assignments[i] for i in ranked]
    for cluster in set(emitted):
        hits = [k for k, c in enumerate(emitted) if c == cluster]
        for a, b in zip(hits, hits[1:]):
            between = emitted[a + 1 : b]
            live = {
                c
                for c in set(assignments.values())
                if c != cluster and any(x == c for x in emitted[a + 1 :])
            }
            assert Counter(between) == Counter(live)
        scores = [membership[ranked[k]] for k in hits]
        assert scores == sorted(scores)


def test_oc_requires_assignments_for_every_corpus_id():
    model = cluster_model({"a": 0, "b": 0}, {"a": 0.5, "b": 0.6})
    with pytest.raises(ValidationError):
        oc_order(corpus_of(["a", "b", "c"]), model)


# --- lls ------------------------------------------------------------------

PAIR_SCORES = {
    frozenset({"d2", "d3"}): 0.9,
    frozenset({"d2", "d5"}): 0.1,
    frozenset({"d0", "d5"}): 0.4,
    frozenset({"d0", "d4"}): 0.7,
    frozenset({"d0", "d1"}): 0.2,
    frozenset({"d0", "d2"}): 0.3,
    frozenset({"d1", "d5"}): 0.6,
    frozenset({"d1", "d2"}): 0.05,
}


def table_comparator(a: Document, b: Document) -> float:
    return PAIR_SCORES.get(frozenset({a.id, b.id}), 0.0)


def test_lls_hand_simulated_walk_previous_only():
    # Seed 1 shuffles d0..d5 into [d2, d3, d5, d0, d4, d1].  Walking with
    # beta 0.4 against the previously kept document: d3 scores 0.9 against d2
    # (drop), d5 scores 0.1 (keep), d0 scores 0.4 against d5 (keep: not
    # strictly greater), d4 scores 0.7 against d0 (drop), d1 scores 0.2 (keep).
    corpus = corpus_of([f"d{i}" for i in range(6)])
    order = lls_order(corpus, beta=0.4, seed=1, comparator=table_comparator)
    assert order.ranked_ids == ("d2", "d5", "d0", "d1")
    assert order.truncated is True


def test_lls_hand_simulated_walk_all_kept():
    # Same walk but comparing against everything kept: d1 now also scores 0.6
    # against d5, so it is dropped too.
    corpus = corpus_of([f"d{i}" for i in range(6)])
    order = lls_order(
        corpus, beta=0.4, seed=1, mode="all_kept", comparator=table_comparator
    )
    assert order.ranked_ids == ("d2", "d5", "d0")
    assert order.truncated is True


def test_lls_beta_one_keeps_the_whole_shuffle():
    corpus = corpus_of([f"d{i}" for i in range(9)])
    order = lls_order(corpus, beta=1.0, seed=4)
    assert order.ranked_ids == random_order(corpus, seed=4).ranked_ids
    assert order.truncated is False


def test_lls_identical_texts_keep_only_the_first():
    ids = [f"d{i}" for i in range(5)]
    corpus = corpus_of(ids, texts={i: "same words every single time" for i in ids})
    order = lls_order(corpus, beta=0.5, seed=2)
    shuffled_first = random_order(corpus, seed=2).ranked_ids[0]
    assert order.ranked_ids == (shuffled_first,)
    assert order.truncated is True


@pytest.mark.parametrize("mode", ["previous_only", "all_kept"])
@pytest.mark.parametrize("seed", range(5))
def test_lls_matches_independent_replay(mode, seed):
    rng = random.Random(7000 + seed)
    ids = [f"w{i:02d}" for i in range(10)]
    scores = {
        frozenset({a, b}): rng.randint(0, 10) / 10
        for k, a in enumerate(ids)
        for b in ids[k + 1 :]
    }

    def comparator(x: Document, y: Document) -> float:
        return scores[frozenset({x.id, y.id})]

    corpus = corpus_of(ids)
    beta = rng.choice([0.2, 0.4, 0.6])
    order = lls_order(corpus, beta=beta, seed=seed, mode=mode, comparator=comparator)

    shuffled = sorted(ids)
    random.Random(seed).shuffle(shuffled)
    kept: list[str] = []
    for doc_id in shuffled:
        if not kept:
            kept.append(doc_id)
            continue
        against = [kept[-1]] if mode == "previous_only" else kept
        if max(scores[frozenset({doc_id, k})] for k in against) > beta:
            continue
        kept.append(doc_id)
    assert list(order.ranked_ids) == kept
    assert order.truncated == (len(kept) < len(ids))


def test_lls_consecutive_kept_pairs_respect_beta_with_real_bleu():
    texts = {
        "t0": "the quick brown fox jumps over the lazy dog",
        "t1": "the quick brown fox jumps over the lazy cat",
        "t2": "a completely different sentence about winter storms",
        "t3": "yet another unrelated line regarding summer harvest",
        "t4": "the quick brown fox leaps over the lazy dog",
        "t5": "paperwork filed neatly inside the cabinet drawer",
    }
    corpus = corpus_of(sorted(texts), texts=texts)
    beta = 0.3
    order = lls_order(corpus, beta=beta, seed=0)
    from idsel.lexical import bleu

    for prev, nxt in zip(order.ranked_ids, order.ranked_ids[1:]):
        assert bleu(corpus.get(nxt), corpus.get(prev)) <= beta


def test_lls_parameter_validation():
    corpus = corpus_of(["a", "b"])
    with pytest.raises(ValidationError):
        lls_order(corpus, beta=1.5)
    with pytest.raises(ValidationError):
        lls_order(corpus, beta=0.4, mode="sideways")


# --- build_order ----------------------------------------------------------


def test_build_order_dispatches_and_fingerprints():
    emb = random_embeddings(12, dim=4, seed=3)
    ids = emb.ids()
    corpus = corpus_of(ids)
    rnd = build_order("random", corpus, seed=5)
    assert rnd == random_order(corpus, seed=5)
    rss = build_order("rss", corpus, emb=emb)
    assert rss.method == "rss" and sorted(rss.ranked_ids) == sorted(ids)
    lls = build_order("lls", corpus, seed=5, beta=1.0)
    assert lls.ranked_ids == rnd.ranked_ids
    assert "beta=1.0" in lls.params_fingerprint
    assert "seed=5" in lls.params_fingerprint


def test_build_order_oc_uses_prebuilt_model_or_embeddings():
    ids = ["a", "b", "c", "d"]
    corpus = corpus_of(ids)
    model = cluster_model(
        {"a": 0, "b": 0, "c": 0, "d": NOISE},
        {"a": 0.3, "b": 0.2, "c": 0.9, "d": 0.0},
    )
    order = build_order("oc", corpus, cluster_model=model)
    assert order.ranked_ids == ("b", "d", "a", "c")

    emb = random_embeddings(30, dim=4, seed=8)
    big_corpus = corpus_of(emb.ids())
    via_emb = build_order(
        "oc", big_corpus, emb=emb, cluster_params=ClusterParams(5, 3)
    )
    assert sorted(via_emb.ranked_ids) == sorted(emb.ids())


def test_build_order_errors():
    corpus = corpus_of(["a", "b"])
    with pytest.raises(ValidationError):
        build_order("rss", corpus)
    with pytest.raises(ValidationError):
        build_order("oc", corpus)
    with pytest.raises(ValidationError):
        build_order("mystery", corpus)
