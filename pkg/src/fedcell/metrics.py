"""Accuracy and macro-averaged F1 computed from a confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .training import ModelParams, TrainerSpec, make_model, predict


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    macro_f1: float
    per_class_f1: tuple[float, ...]


def compute_metrics(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> EvalMetrics:
    """Metrics over argmax predictions; 0/0 precision, recall and F1 are 0."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) == 0:
        raise ValueError("cannot evaluate on an empty set")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)

    per_class = []
    for c in range(n_classes):
        tp = confusion[c, c]
        fp = confusion[:, c].sum() - tp
        fn = confusion[c, :].sum() - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        if precision + recall > 0:
            per_class.append(2.0 * precision * recall / (precision + recall))
        else:
            per_class.append(0.0)

    accuracy = float(np.trace(confusion) / len(y_true))
    return EvalMetrics(
        accuracy=accuracy,
        macro_f1=float(np.mean(per_class)),
        per_class_f1=tuple(float(f) for f in per_class),
    )


def evaluate(params: ModelParams, test: Dataset, spec: TrainerSpec) -> EvalMetrics:
    """Run the model on the held-out set and score it."""
    model = make_model(spec, test.n_features, test.n_classes)
    y_pred = predict(model, params.values, test.features)
    return compute_metrics(test.labels, y_pred, test.n_classes)
