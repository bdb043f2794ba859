"""Lexical overlap scoring between documents: sentence-level BLEU.

Used as the comparison function g(a, b) when ordering documents under a
lexical-similarity cap.  The comparator is deliberately a plain callable
``(Document, Document) -> float`` so alternative metrics can be injected
without touching the selection code.
"""

from __future__ import annotations

import math
import sys
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from idsel.corpus import Document
from idsel.errors import ValidationError

Comparator = Callable[[Document, Document], float]

SMOOTHING_MODES = ("none", "add_epsilon")

_EPSILON = 1e-9

_PUNCT = {
    chr(cp)
    for cp in range(sys.maxunicode + 1)
    if unicodedata.category(chr(cp)).startswith("P")
}
_STRIP_CHARS = "".join(_PUNCT)


@dataclass(frozen=True)
class LexicalParams:
    """Knobs for the BLEU comparison."""

    max_ngram: int = 4
    smoothing: str = "none"

    def __post_init__(self) -> None:
        if self.max_ngram < 1:
            raise ValidationError(f"max_ngram must be >= 1, got {self.max_ngram}")
        if self.smoothing not in SMOOTHING_MODES:
            raise ValidationError(
                f"smoothing must be one of {SMOOTHING_MODES}, got {self.smoothing!r}"
            )


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation, drop empties."""
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(_STRIP_CHARS)
        if token:
            tokens.append(token)
    return tokens


def _ngrams(tokens: list[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def bleu(
    candidate: Document, reference: Document, params: LexicalParams | None = None
) -> float:
    """Sentence BLEU of ``candidate`` against a single ``reference``.

    Geometric mean of modified n-gram precisions p_1..p_max_ngram times the
    brevity penalty min(1, exp(1 - r/c)).  With smoothing "none" any zero
    precision makes the score 0; "add_epsilon" replaces zero match counts
    with 1e-9 so near-misses stay comparable.
    """
    if params is None:
        params = LexicalParams()
    cand = tokenize(candidate.text)
    ref = tokenize(reference.text)
    if not cand:
        raise ValidationError(f"document {candidate.id!r} has no tokens")
    if not ref:
        raise ValidationError(f"document {reference.id!r} has no tokens")

    log_sum = 0.0
    for order in range(1, params.max_ngram + 1):
        cand_ngrams = _ngrams(cand, order)
        total = sum(cand_ngrams.values())
        if total == 0:
            # Candidate shorter than this order: no n-grams to be precise
            # about, counted as a zero precision.
            matched = 0
        else:
            ref_ngrams = _ngrams(ref, order)
            matched = sum(
                min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items()
            )
        if matched == 0:
            if params.smoothing == "none":
                return 0.0
            numerator = _EPSILON
        else:
            numerator = float(matched)
        denominator = float(total) if total else _EPSILON
        log_sum += math.log(numerator / denominator)

    brevity = min(1.0, math.exp(1.0 - len(ref) / len(cand)))
    score = brevity * math.exp(log_sum / params.max_ngram)
    return min(1.0, max(0.0, score))


def exceeds_threshold(
    a: Document, b: Document, beta: float, params: LexicalParams | None = None
) -> bool:
    """True iff the lexical similarity of ``a`` against ``b`` is above ``beta``."""
    if not 0.0 <= beta <= 1.0:
        raise ValidationError(f"beta must be in [0, 1], got {beta}")
    return bleu(a, b, params) > beta
