"""Documents, label sets, and the JSONL corpus / selection file formats.

A corpus file holds one JSON object per line with keys "id" (string),
"text" (string) and optionally "label" (string). A selection file holds
one JSON object per line with keys "rank" (integer from 0) and "id".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from idsel.errors import FormatError, ValidationError


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    gold_label: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("document id must be a non-empty string")
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValidationError(f"document {self.id!r} has empty text")


class Corpus:
    """Immutable, ordered collection of documents with unique ids."""

    def __init__(self, documents: Iterable[Document], provenance: str | None = None):
        docs = tuple(documents)
        index: dict[str, Document] = {}
        for doc in docs:
            if doc.id in index:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            index[doc.id] = doc
        self._docs = docs
        self._index = index
        self.provenance = provenance

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index

    def get(self, doc_id: str) -> Document:
        try:
            return self._index[doc_id]
        except KeyError:
            raise ValidationError(f"unknown document id {doc_id!r}") from None

    def ids(self) -> list[str]:
        return [doc.id for doc in self._docs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._docs == other._docs

    def __repr__(self) -> str:
        return f"Corpus({len(self._docs)} documents, provenance={self.provenance!r})"


@dataclass(frozen=True)
class LabelSet:
    """Distinct class names in stable first-appearance order."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("labels must be distinct")
        if len(self.labels) < 2:
            raise ValidationError(
                f"a label set needs at least 2 classes, got {list(self.labels)}"
            )

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def extended(self, label: str) -> "LabelSet":
        if label in self.labels:
            return self
        return LabelSet(self.labels + (label,))


def load_corpus(path: str | Path) -> Corpus:
    """Read a JSONL corpus file, preserving line order."""
    path = Path(path)
    docs: list[Document] = []
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
            label = obj.get("label")
            if label is not None and not isinstance(label, str):
                raise FormatError(f"{path}:{lineno}: label must be a string")
            try:
                docs.append(Document(id=obj["id"], text=obj["text"], gold_label=label))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return Corpus(docs, provenance=str(path))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus:
            obj: dict[str, str] = {"id": doc.id, "text": doc.text}
            if doc.gold_label is not None:
                obj["label"] = doc.gold_label
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def label_set_of(corpus: Corpus) -> LabelSet:
    """Distinct gold labels in first-appearance order; every doc must be labeled."""
    missing = [doc.id for doc in corpus if doc.gold_label is None]
    if missing:
        raise ValidationError(f"documents without gold label: {missing}")
    seen: dict[str, None] = {}
    for doc in corpus:
        seen.setdefault(doc.gold_label, None)
    return LabelSet(tuple(seen))


def save_selection(ranked_ids: Iterable[str], path: str | Path) -> None:
    """Write ranked ids as JSONL rows {"rank": k, "id": id}, rank from 0."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rank, doc_id in enumerate(ranked_ids):
            fh.write(json.dumps({"rank": rank, "id": doc_id}, ensure_ascii=False) + "\n")


def load_selection(path: str | Path) -> list[str]:
    """Read a selection file back into a ranked id list, validating ranks."""
    path = Path(path)
    ranked: list[str] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: malformed JSON line: {exc}") from exc
            if not isinstance(obj, dict) or "rank" not in obj or "id" not in obj:
                raise FormatError(f'{path}:{lineno}: expected object with "rank" and "id"')
            if obj["rank"] != len(ranked):
                raise FormatError(
                    f"{path}:{lineno}: expected rank {len(ranked)}, got {obj['rank']}"
                )
            ranked.append(obj["id"])
    if len(set(ranked)) != len(ranked):
        raise ValidationError(f"{path}: selection contains duplicate ids")
    return ranked
