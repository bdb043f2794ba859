"""Annotation sessions: serve documents in order until every class has
``n_shots`` labels, then report the overannotation rate.

The overannotation rate theta = |annotated| / (n_classes * n_shots) measures
how many documents had to be labeled relative to the theoretical minimum; the
closer to 1.0, the less annotation effort was wasted.  A session ends
``complete`` when every class reached the target, or ``exhausted`` when the
order ran out first (possible with truncated orders or classes rarer than
``n_shots``); exhausted sessions still report theta plus per-class deficits.

State is immutable: ``annotate`` returns a new :class:`SessionState`, which
makes journal replay and concurrent reads trivial.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Mapping

from idsel.corpus import Corpus, LabelSet, label_set_of
from idsel.errors import FormatError, StateError, ValidationError
from idsel.selectors import STOCHASTIC_METHODS, SelectionOrder

ACTIVE = "active"
COMPLETE = "complete"
EXHAUSTED = "exhausted"

DEFAULT_N_SHOTS_GRID = (8, 16, 32, 64)
DEFAULT_REPEATS = 10

OrderProvider = Callable[[int], SelectionOrder]


@dataclass(frozen=True)
class SessionConfig:
    """Stopping rule: collect at least ``n_shots`` labels for every class."""

    n_shots: int
    label_set: LabelSet
    allow_new_labels: bool = False

    def __post_init__(self) -> None:
        if self.n_shots < 1:
            raise ValidationError(f"n_shots must be >= 1, got {self.n_shots}")


@dataclass(frozen=True)
class AnnotatedSet:
    """Ordered (document id, label) records; each document at most once."""

    records: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        ids = [doc_id for doc_id, _ in self.records]
        if len(set(ids)) != len(ids):
            raise ValidationError("document annotated twice")

    @cached_property
    def per_class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for _, label in self.records:
            counts[label] = counts.get(label, 0) + 1
        return counts

    def count(self, label: str) -> int:
        return self.per_class_counts.get(label, 0)

    def with_record(self, doc_id: str, label: str) -> "AnnotatedSet":
        return AnnotatedSet(records=self.records + ((doc_id, label),))

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class SessionState:
    """One annotation session over a fixed order.

    ``label_set`` starts as the configured set and may grow when
    ``allow_new_labels`` is on; growth raises the completion bar.
    """

    config: SessionConfig
    order: SelectionOrder
    cursor: int
    annotated: AnnotatedSet
    label_set: LabelSet
    status: str

    def __post_init__(self) -> None:
        if not 0 <= self.cursor <= len(self.order.ranked_ids):
            raise ValidationError(f"cursor {self.cursor} out of range")
        if self.status != _status_of(
            self.config, self.order, self.cursor, self.annotated, self.label_set
        ):
            raise ValidationError(f"status {self.status!r} inconsistent with state")


def _status_of(
    config: SessionConfig,
    order: SelectionOrder,
    cursor: int,
    annotated: AnnotatedSet,
    label_set: LabelSet,
) -> str:
    if all(annotated.count(label) >= config.n_shots for label in label_set.labels):
        return COMPLETE
    if cursor >= len(order.ranked_ids):
        return EXHAUSTED
    return ACTIVE


def new_session(config: SessionConfig, order: SelectionOrder) -> SessionState:
    annotated = AnnotatedSet()
    return SessionState(
        config=config,
        order=order,
        cursor=0,
        annotated=annotated,
        label_set=config.label_set,
        status=_status_of(config, order, 0, annotated, config.label_set),
    )


def next_document(state: SessionState) -> str:
    """Peek the document to annotate next; does not advance."""
    if state.status != ACTIVE:
        raise StateError(f"session is {state.status}")
    return state.order.ranked_ids[state.cursor]


def annotate(state: SessionState, doc_id: str, label: str) -> SessionState:
    """Record one label for the current head document and advance."""
    if state.status != ACTIVE:
        raise StateError(f"session is {state.status}")
    head = state.order.ranked_ids[state.cursor]
    if doc_id != head:
        raise StateError(f"expected document {head!r} next, got {doc_id!r}")
    if not isinstance(label, str) or not label:
        raise ValidationError("label must be a non-empty string")

    label_set = state.label_set
    if label not in label_set.labels:
        if not state.config.allow_new_labels:
            raise ValidationError(f"unknown label {label!r}")
        label_set = label_set.extended(label)

    annotated = state.annotated.with_record(doc_id, label)
    cursor = state.cursor + 1
    return replace(
        state,
        cursor=cursor,
        annotated=annotated,
        label_set=label_set,
        status=_status_of(state.config, state.order, cursor, annotated, label_set),
    )


def theta_so_far(state: SessionState) -> float:
    """Annotations so far over the n_classes * n_shots minimum (live view)."""
    return len(state.annotated) / (state.label_set.n_classes * state.config.n_shots)


def overannotation_rate(state: SessionState) -> float:
    """Final theta of a finished session."""
    if state.status == ACTIVE:
        raise StateError("session still active")
    if len(state.annotated) == 0:
        raise StateError("no annotations recorded")
    return theta_so_far(state)


def deficits(state: SessionState) -> dict[str, int]:
    """Per-class shortfall against n_shots (empty when complete)."""
    return {
        label: state.config.n_shots - state.annotated.count(label)
        for label in state.label_set.labels
        if state.annotated.count(label) < state.config.n_shots
    }


def simulate(
    corpus: Corpus, order: SelectionOrder, config: SessionConfig
) -> tuple[SessionState, float]:
    """Replay the session using each document's gold label as the annotation."""
    state = new_session(config, order)
    while state.status == ACTIVE:
        doc_id = next_document(state)
        gold = corpus.get(doc_id).gold_label
        if gold is None:
            raise ValidationError(f"document {doc_id!r} has no gold label")
        state = annotate(state, doc_id, gold)
    return state, overannotation_rate(state)


def sweep(
    corpus: Corpus,
    providers: Mapping[str, OrderProvider],
    n_shots_grid: tuple[int, ...] = DEFAULT_N_SHOTS_GRID,
    repeats: int = DEFAULT_REPEATS,
    base_seed: int = 0,
    labels: LabelSet | None = None,
) -> list[dict]:
    """Theta table over methods and the n_shots grid.

    ``providers`` maps each method name to ``seed -> SelectionOrder``.
    Stochastic methods (random, lls) run ``repeats`` times with seeds
    base_seed..base_seed+repeats-1 and report a 95% normal-approximation
    confidence interval; deterministic methods run once (their provider is
    called with ``base_seed`` and may ignore it) and report ci == mean.
    """
    if not n_shots_grid:
        raise ValidationError("n_shots grid is empty")
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    if labels is None:
        labels = label_set_of(corpus)

    orders: dict[str, list[SelectionOrder]] = {}
    for method, provider in providers.items():
        if method in STOCHASTIC_METHODS:
            seeds = [base_seed + i for i in range(repeats)]
        else:
            seeds = [base_seed]
        orders[method] = [provider(seed) for seed in seeds]

    rows: list[dict] = []
    for method, method_orders in orders.items():
        for n_shots in sorted(n_shots_grid):
            config = SessionConfig(n_shots=n_shots, label_set=labels)
            thetas: list[float] = []
            exhausted = 0
            for order in method_orders:
                state, theta = simulate(corpus, order, config)
                thetas.append(theta)
                if state.status == EXHAUSTED:
                    exhausted += 1
            mean = sum(thetas) / len(thetas)
            if method in STOCHASTIC_METHODS and len(thetas) > 1:
                sd = statistics.stdev(thetas)
                half = 1.96 * sd / math.sqrt(len(thetas))
            else:
                half = 0.0
            rows.append(
                {
                    "method": method,
                    "n_shots": n_shots,
                    "runs": len(thetas),
                    "mean_theta": mean,
                    "ci_low": mean - half,
                    "ci_high": mean + half,
                    "exhausted_runs": exhausted,
                }
            )
    return rows


def export_session(state: SessionState) -> list[str]:
    """Session as JSON lines: one per record, then a summary line.

    The summary reports theta by the same |records|/(n_classes*n_shots)
    formula at any status; for finished sessions that is the final
    overannotation rate.  Exhausted sessions also list per-class deficits.
    """
    lines = [
        json.dumps({"rank": rank, "id": doc_id, "label": label}, sort_keys=True)
        for rank, (doc_id, label) in enumerate(state.annotated.records)
    ]
    summary = {
        "method": state.order.method,
        "n_shots": state.config.n_shots,
        "n_classes": state.label_set.n_classes,
        "total_annotations": len(state.annotated),
        "theta": theta_so_far(state),
        "status": state.status,
        "per_class_counts": dict(state.annotated.per_class_counts),
    }
    if state.status == EXHAUSTED:
        summary["deficits"] = deficits(state)
    lines.append(json.dumps(summary, sort_keys=True))
    return lines


def parse_export(lines: list[str]) -> tuple[list[tuple[int, str, str]], dict]:
    """Inverse of export_session; validates ranks and the summary totals."""
    if not lines:
        raise FormatError("empty session export")
    records: list[tuple[int, str, str]] = []
    try:
        rows = [json.loads(line) for line in lines if line.strip()]
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in session export: {exc}") from None
    summary = rows[-1]
    if "status" not in summary:
        raise FormatError("session export missing summary line")
    for pos, row in enumerate(rows[:-1]):
        if row.get("rank") != pos:
            raise FormatError(f"record {pos} has rank {row.get('rank')!r}")
        if not isinstance(row.get("id"), str) or not isinstance(row.get("label"), str):
            raise FormatError(f"record {pos} missing id or label")
        records.append((pos, row["id"], row["label"]))
    if summary.get("total_annotations") != len(records):
        raise FormatError(
            f"summary total_annotations={summary.get('total_annotations')} "
            f"but {len(records)} records present"
        )
    return records, summary
