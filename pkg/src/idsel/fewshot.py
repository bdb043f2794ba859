"""Few-shot evaluation of an annotated set: nearest-centroid classification.

A deliberately light stand-in for heavyweight trainers: per-class centroids
over frozen embeddings, cosine nearest-centroid prediction, then accuracy and
macro-F1.  The variable under study is *which documents were selected for
annotation*, so the classifier only needs to be a faithful, deterministic
function of the annotated set.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from idsel.annotation import (
    EXHAUSTED,
    AnnotatedSet,
    OrderProvider,
    SessionConfig,
    simulate,
)
from idsel.corpus import Corpus, LabelSet, label_set_of
from idsel.errors import ValidationError
from idsel.geometry import EmbeddingSet
from idsel.selectors import STOCHASTIC_METHODS


@dataclass(frozen=True)
class CentroidClassifier:
    """One mean vector per label, all of equal dimension."""

    centroids: dict[str, np.ndarray]
    dim: int

    def __post_init__(self) -> None:
        if not self.centroids:
            raise ValidationError("classifier has no centroids")
        for label, vec in self.centroids.items():
            if vec.shape != (self.dim,):
                raise ValidationError(
                    f"centroid for {label!r} has shape {vec.shape}, expected ({self.dim},)"
                )

    @property
    def labels(self) -> list[str]:
        return sorted(self.centroids)


@dataclass(frozen=True)
class EvalReport:
    """Accuracy plus per-class and macro F1 over one evaluation run."""

    accuracy: float
    macro_f1: float
    per_class_f1: dict[str, float]
    support: dict[str, int]

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError(f"accuracy out of range: {self.accuracy}")
        mean = sum(self.per_class_f1.values()) / len(self.per_class_f1)
        if abs(mean - self.macro_f1) > 1e-12:
            raise ValidationError("macro_f1 is not the mean of per_class_f1")


def fit(train: AnnotatedSet, emb: EmbeddingSet) -> CentroidClassifier:
    """Per-class centroid = arithmetic mean of the class's member vectors."""
    if len(train) == 0:
        raise ValidationError("cannot fit on an empty annotated set")
    by_label: dict[str, list[str]] = {}
    for doc_id, label in train.records:
        if doc_id not in emb:
            raise ValidationError(f"no embedding for annotated document {doc_id!r}")
        by_label.setdefault(label, []).append(doc_id)
    centroids = {
        label: emb.rows_for(ids).mean(axis=0) for label, ids in by_label.items()
    }
    dim = emb.matrix.shape[1]
    for label, vec in centroids.items():
        if float(np.linalg.norm(vec)) == 0.0:
            raise ValidationError(f"centroid for label {label!r} is the zero vector")
    return CentroidClassifier(centroids=centroids, dim=dim)


def predict(
    model: CentroidClassifier, emb: EmbeddingSet, ids: list[str]
) -> dict[str, str]:
    """Label of the most cosine-similar centroid; ties take the smaller label."""
    missing = [i for i in ids if i not in emb]
    if missing:
        raise ValidationError(f"no embedding for ids: {missing[:5]}")
    labels = model.labels
    cent = np.stack([model.centroids[label] for label in labels])
    cent = cent / np.linalg.norm(cent, axis=1, keepdims=True)
    rows = emb.rows_for(ids)
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    sims = rows @ cent.T
    # argmax returns the first maximum; labels are sorted, so ties resolve
    # to the lexicographically smaller label.
    best = np.argmax(sims, axis=1)
    return {doc_id: labels[int(k)] for doc_id, k in zip(ids, best)}


def evaluate(
    predictions: Mapping[str, str], gold: Corpus, labels: LabelSet | None = None
) -> EvalReport:
    """Accuracy and one-vs-rest F1 per class, macro-averaged over ``labels``.

    ``labels`` defaults to the distinct gold labels of the evaluated ids.
    Predicting a label outside that set is an error; a label with no
    predictions and no gold occurrences scores F1 = 0.
    """
    if not predictions:
        raise ValidationError("no predictions to evaluate")
    gold_labels: dict[str, str] = {}
    for doc_id in predictions:
        doc = gold.get(doc_id)
        if doc.gold_label is None:
            raise ValidationError(f"document {doc_id!r} has no gold label")
        gold_labels[doc_id] = doc.gold_label

    if labels is None:
        label_list = sorted(set(gold_labels.values()))
    else:
        label_list = list(labels.labels)
    known = set(label_list)
    for doc_id, label in predictions.items():
        if label not in known:
            raise ValidationError(
                f"prediction {label!r} for {doc_id!r} not in the label set"
            )

    correct = sum(
        1 for doc_id, label in predictions.items() if label == gold_labels[doc_id]
    )
    accuracy = correct / len(predictions)

    per_class_f1: dict[str, float] = {}
    support: dict[str, int] = {}
    for label in label_list:
        tp = sum(
            1
            for doc_id, pred in predictions.items()
            if pred == label and gold_labels[doc_id] == label
        )
        pred_count = sum(1 for pred in predictions.values() if pred == label)
        gold_count = sum(1 for g in gold_labels.values() if g == label)
        support[label] = gold_count
        precision = tp / pred_count if pred_count else 0.0
        recall = tp / gold_count if gold_count else 0.0
        if precision + recall == 0.0:
            per_class_f1[label] = 0.0
        else:
            per_class_f1[label] = 2 * precision * recall / (precision + recall)
    macro = sum(per_class_f1.values()) / len(per_class_f1)
    return EvalReport(
        accuracy=accuracy,
        macro_f1=macro,
        per_class_f1=per_class_f1,
        support=support,
    )


def rq2_experiment(
    corpus: Corpus,
    emb: EmbeddingSet,
    providers: Mapping[str, OrderProvider],
    test: Corpus,
    n_shots_grid: tuple[int, ...],
    repeats: int,
    base_seed: int = 0,
    test_emb: EmbeddingSet | None = None,
    labels: LabelSet | None = None,
) -> list[dict]:
    """Downstream comparison: simulate annotation, fit, score on ``test``.

    Stochastic methods aggregate mean and sample standard deviation over
    ``repeats`` seeded runs; deterministic methods run once with sd 0.
    ``test_emb`` defaults to ``emb`` (one embedding set covering both pools).
    """
    if not n_shots_grid:
        raise ValidationError("n_shots grid is empty")
    if repeats < 1:
        raise ValidationError(f"repeats must be >= 1, got {repeats}")
    if labels is None:
        labels = label_set_of(corpus)
    if test_emb is None:
        test_emb = emb
    test_ids = sorted(test.ids())
    if not test_ids:
        raise ValidationError("test corpus is empty")

    orders: dict[str, list] = {}
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
            accuracies: list[float] = []
            macro_f1s: list[float] = []
            thetas: list[float] = []
            exhausted = 0
            for order in method_orders:
                state, theta = simulate(corpus, order, config)
                model = fit(state.annotated, emb)
                preds = predict(model, test_emb, test_ids)
                report = evaluate(preds, test)
                accuracies.append(report.accuracy)
                macro_f1s.append(report.macro_f1)
                thetas.append(theta)
                if state.status == EXHAUSTED:
                    exhausted += 1

            def agg(values: list[float]) -> tuple[float, float]:
                mean = sum(values) / len(values)
                sd = statistics.stdev(values) if len(values) > 1 else 0.0
                return mean, sd

            acc_mean, acc_sd = agg(accuracies)
            f1_mean, f1_sd = agg(macro_f1s)
            theta_mean, _ = agg(thetas)
            rows.append(
                {
                    "method": method,
                    "n_shots": n_shots,
                    "runs": len(method_orders),
                    "accuracy_mean": acc_mean,
                    "accuracy_sd": acc_sd,
                    "macro_f1_mean": f1_mean,
                    "macro_f1_sd": f1_sd,
                    "mean_theta": theta_mean,
                    "exhausted_runs": exhausted,
                }
            )
    return rows
