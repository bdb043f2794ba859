"""Embedding backends: a deterministic offline encoder and transformer models.

A model identifier of the form ``hash://<dim>`` selects the built-in
feature-hashing encoder: each token contributes ±1 to a SHA-256-chosen
coordinate, so the output is a pure function of the text and needs no
downloads.  Any other identifier is treated as a sentence-transformers model
name and requires that package to be installed.
"""

from __future__ import annotations

import hashlib
from collections.abc import Callable

import numpy as np

from idsel.errors import ValidationError

DEFAULT_MODEL = "sentence-transformers/paraphrase-multilingual-mpnet-base-v2"

Encoder = Callable[[list[str]], np.ndarray]

HASH_SCHEME = "hash://"


def _hash_vector(text: str, dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    for token in text.lower().split():
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        index = int.from_bytes(digest[:8], "big") % dim
        vec[index] += 1.0 if digest[8] % 2 == 0 else -1.0
    if not vec.any():
        # Signs can cancel exactly; keep the row usable for cosine geometry.
        vec[0] = 1.0
    return vec


def _hash_encoder(dim: int) -> Encoder:
    def encode(texts: list[str]) -> np.ndarray:
        return np.stack([_hash_vector(text, dim) for text in texts])

    return encode


def _transformer_encoder(model_name: str) -> Encoder:
    try:
        from sentence_transformers import SentenceTransformer
    except ImportError:
        raise ValidationError(
            f"model {model_name!r} needs the sentence-transformers package; "
            f"install it or use an offline {HASH_SCHEME}<dim> model"
        ) from None
    try:
        model = SentenceTransformer(model_name)
    except Exception as exc:  # model name resolution is the backend's domain
        raise ValidationError(f"unresolvable model {model_name!r}: {exc}") from exc

    def encode(texts: list[str]) -> np.ndarray:
        return model.encode(
            texts,
            convert_to_numpy=True,
            normalize_embeddings=False,
            show_progress_bar=False,
        )

    return encode


def resolve_backend(model: str) -> Encoder:
    """Turn a model identifier into a batch-encoding function."""
    if model.startswith(HASH_SCHEME):
        spec = model[len(HASH_SCHEME) :]
        try:
            dim = int(spec)
        except ValueError:
            raise ValidationError(
                f"unresolvable model {model!r}: expected {HASH_SCHEME}<dim>"
            ) from None
        if dim < 1:
            raise ValidationError(f"unresolvable model {model!r}: dim must be >= 1")
        return _hash_encoder(dim)
    return _transformer_encoder(model)
