"""Shared test fixtures."""

from __future__ import annotations

import numpy as np
import pytest

from idsel.corpus import Corpus, Document
from idsel.geometry import EmbeddingSet


@pytest.fixture
def tiny_corpus() -> Corpus:
    return Corpus(
        [
            Document("a", "the quick brown fox jumps over the lazy dog", "pos"),
            Document("b", "a slow green turtle crawls under the warm sun", "neg"),
            Document("c", "the quick brown fox leaps over the lazy dog", "pos"),
            Document("d", "market prices fell sharply after the announcement", "neg"),
            Document("e", "completely unrelated words about cooking pasta tonight", "pos"),
        ]
    )


@pytest.fixture
def tiny_embeddings(tiny_corpus) -> EmbeddingSet:
    rng = np.random.default_rng(123)
    return EmbeddingSet.from_mapping(
        {doc.id: rng.normal(size=6).astype(np.float32) for doc in tiny_corpus}
    )
