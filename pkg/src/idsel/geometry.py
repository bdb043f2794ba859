"""Embedding storage, cosine similarity, and the dense pairwise similarity matrix.

Binary embedding file layout: magic b"IDSEL1", u32 LE row count, u32 LE dim,
then per row [u16 LE id byte length, id bytes (UTF-8), dim x f32 LE].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from idsel import kernels
from idsel.errors import FormatError, ValidationError

MAGIC = b"IDSEL1"


class EmbeddingSet:
    """One fixed-width vector per document id.

    Vectors are stored as a float32 matrix in insertion order; lookups go
    through an id index. Zero and non-finite vectors are rejected.
    """

    def __init__(self, ids: Sequence[str], matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2:
            raise ValidationError("embedding matrix must be 2-dimensional")
        if len(ids) != matrix.shape[0]:
            raise ValidationError("one id per embedding row required")
        if matrix.shape[1] == 0:
            raise ValidationError("embedding dim must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("embeddings contain non-finite entries")
        norms = np.linalg.norm(matrix.astype(np.float64), axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ValidationError(f"zero vector for id {ids[zero[0]]!r}")
        index: dict[str, int] = {}
        for pos, doc_id in enumerate(ids):
            if doc_id in index:
                raise ValidationError(f"duplicate embedding id {doc_id!r}")
            index[doc_id] = pos
        self._ids = tuple(ids)
        self._index = index
        self.matrix = matrix
        self.dim = matrix.shape[1]

    @classmethod
    def from_mapping(cls, vectors: Mapping[str, Iterable[float]]) -> "EmbeddingSet":
        ids = list(vectors)
        rows = np.asarray([np.asarray(vectors[i], dtype=np.float32) for i in ids])
        return cls(ids, rows)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index

    def ids(self) -> list[str]:
        return list(self._ids)

    def vector(self, doc_id: str) -> np.ndarray:
        try:
            return self.matrix[self._index[doc_id]]
        except KeyError:
            raise ValidationError(f"no embedding for id {doc_id!r}") from None

    def rows_for(self, ids: Sequence[str]) -> np.ndarray:
        """Float64 matrix with one row per requested id, in request order."""
        try:
            positions = [self._index[i] for i in ids]
        except KeyError as exc:
            raise ValidationError(f"no embedding for id {exc.args[0]!r}") from None
        return self.matrix[positions].astype(np.float64)


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense symmetric cosine matrix over an ordered id list."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {i: p for p, i in enumerate(self.ids)})

    def value(self, id_a: str, id_b: str) -> float:
        idx = self._index
        try:
            return float(self.values[idx[id_a], idx[id_b]])
        except KeyError as exc:
            raise ValidationError(f"id {exc.args[0]!r} not in similarity matrix") from None

    def covers(self, ids: Iterable[str]) -> bool:
        return all(i in self._index for i in ids)

    def submatrix(self, ids: Sequence[str]) -> np.ndarray:
        """Dense similarity block for ``ids``, in the given order."""
        idx = self._index
        try:
            positions = [idx[i] for i in ids]
        except KeyError as exc:
            raise ValidationError(
                f"id {exc.args[0]!r} not in similarity matrix"
            ) from None
        return self.values[np.ix_(positions, positions)]


def cosine(a: Iterable[float], b: Iterable[float]) -> float:
    """Cosine similarity dot(a, b) / (|a| |b|), in [-1, 1]."""
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape or va.ndim != 1:
        raise ValidationError("cosine requires two vectors of equal length")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine is undefined for zero vectors")
    return float(np.dot(va, vb) / (na * nb))


def similarity_matrix(
    emb: EmbeddingSet, ids: Sequence[str], threads: int = 1
) -> SimilarityMatrix:
    """All-pairs cosine over the given ids.

    The matrix is computed from the upper triangle and mirrored, so it is
    exactly symmetric; the diagonal is set to exactly 1.0. Row blocks may be
    computed concurrently (threads > 1) with output identical to the
    sequential result.
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ValidationError("similarity_matrix ids must be distinct")
    rows = emb.rows_for(ids)
    unit = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    values = kernels.pairwise_cosine(np.ascontiguousarray(unit), threads=threads)
    return SimilarityMatrix(ids=tuple(ids), values=values)


def load_embeddings(path: str | Path) -> EmbeddingSet:
    """Read the binary embedding format; see the module docstring for layout."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:6] != MAGIC:
        raise FormatError(f"{path}: bad magic, not an embedding file")
    if len(blob) < 14:
        raise FormatError(f"{path}: truncated header")
    count, dim = struct.unpack_from("<II", blob, 6)
    if dim == 0:
        raise FormatError(f"{path}: dim must be positive")
    offset = 14
    ids: list[str] = []
    vectors = np.empty((count, dim), dtype=np.float32)
    for row in range(count):
        if offset + 2 > len(blob):
            raise FormatError(f"{path}: truncated at row {row} (expected {count} rows)")
        (id_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        if offset + id_len + 4 * dim > len(blob):
            raise FormatError(f"{path}: truncated at row {row} (expected {count} rows)")
        doc_id = blob[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vectors[row] = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset)
        offset += 4 * dim
        ids.append(doc_id)
    if offset != len(blob):
        raise FormatError(f"{path}: {len(blob) - offset} trailing bytes after {count} rows")
    return EmbeddingSet(ids=ids, matrix=vectors)


def save_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write the binary embedding format."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", len(emb), emb.dim))
        for doc_id in emb.ids():
            raw = doc_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(emb.vector(doc_id).astype("<f4").tobytes())
