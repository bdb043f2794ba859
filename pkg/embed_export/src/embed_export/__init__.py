"""Corpus-to-embedding export with pluggable sentence-embedding backends.

Reads a JSONL corpus (``{"id": ..., "text": ...}`` per line), embeds every
non-empty text with the configured model, and writes the binary embedding
format consumed by ``idsel.geometry.load_embeddings`` plus a sibling
``<out>.manifest.json`` recording ``{model, dim, count, skipped_ids,
normalized}``.  Rows whose text is empty after trimming are skipped and
listed in the manifest instead of failing the export.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from idsel.errors import FormatError, ValidationError
from idsel.geometry import EmbeddingSet, save_embeddings

from embed_export.backends import DEFAULT_MODEL, resolve_backend

__all__ = [
    "DEFAULT_MODEL",
    "ExportConfig",
    "export_embeddings",
    "manifest_path_for",
]

__version__ = "0.1.0"


@dataclass(frozen=True)
class ExportConfig:
    """What to embed, with which model, and where to write it."""

    corpus: str | Path
    out: str | Path
    model: str = DEFAULT_MODEL
    batch_size: int = 32
    normalize: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")


def manifest_path_for(out: str | Path) -> Path:
    return Path(f"{out}.manifest.json")


def _read_rows(path: Path) -> tuple[list[tuple[str, str]], list[str]]:
    """(id, text) rows in file order, plus ids skipped for empty text."""
    rows: list[tuple[str, str]] = []
    skipped: list[str] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: malformed JSON line: {exc}") from exc
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise FormatError(f'{path}:{lineno}: expected object with "id" and "text"')
            doc_id, text = obj["id"], obj["text"]
            if not isinstance(doc_id, str) or not doc_id:
                raise FormatError(f"{path}:{lineno}: id must be a non-empty string")
            if doc_id in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            if not isinstance(text, str) or not text.strip():
                skipped.append(doc_id)
                continue
            rows.append((doc_id, text))
    return rows, skipped


def export_embeddings(config: ExportConfig) -> dict:
    """Embed the corpus and write the binary file plus its manifest.

    Returns the manifest dict.  Row order equals corpus order (skipped rows
    removed); vectors are L2-normalized when ``config.normalize`` is on.
    """
    corpus_path = Path(config.corpus)
    if not corpus_path.exists():
        raise FormatError(f"corpus file not found: {corpus_path}")
    rows, skipped = _read_rows(corpus_path)
    if not rows:
        raise ValidationError(f"{corpus_path}: no embeddable rows")

    encode = resolve_backend(config.model)
    ids = [doc_id for doc_id, _ in rows]
    blocks = []
    for start in range(0, len(rows), config.batch_size):
        batch = [text for _, text in rows[start : start + config.batch_size]]
        blocks.append(np.asarray(encode(batch), dtype=np.float64))
    matrix = np.vstack(blocks)
    if config.normalize:
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        matrix = matrix / norms

    emb = EmbeddingSet(ids, matrix.astype(np.float32))
    save_embeddings(emb, config.out)
    manifest = {
        "model": config.model,
        "dim": emb.dim,
        "count": len(emb),
        "skipped_ids": skipped,
        "normalized": config.normalize,
    }
    manifest_path_for(config.out).write_text(
        json.dumps(manifest, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
