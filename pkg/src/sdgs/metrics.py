"""Example-based multi-label evaluation metrics.

Hamming loss is the mean per-entry disagreement; precision, recall, F1
and accuracy are averaged per sample over the predicted and true label
sets. A per-sample term whose denominator is empty contributes 1 when
both sets are empty and 0 otherwise; such rows are counted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class EvaluationReport:
    hamming_loss: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    n_samples: int
    degenerate_rows: int

    def as_dict(self) -> dict:
        return {
            "hamming_loss": self.hamming_loss,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "n_samples": self.n_samples,
            "degenerate_rows": self.degenerate_rows,
        }


def _check_pair(truth, pred):
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.ndim != 2 or pred.ndim != 2:
        raise InvalidInputError("label matrices must be 2-D")
    if truth.shape != pred.shape:
        raise InvalidInputError(f"shape mismatch: truth {truth.shape} vs prediction {pred.shape}")
    if truth.size == 0:
        raise InvalidInputError("label matrices are empty")
    for name, mat in (("truth", truth), ("prediction", pred)):
        if not np.isin(mat, (0, 1)).all():
            raise InvalidInputError(f"{name} matrix is not binary")
    return truth.astype(np.int64), pred.astype(np.int64)


def evaluate(truth, pred) -> EvaluationReport:
    """All five example-based metrics for a truth/prediction pair."""
    truth, pred = _check_pair(truth, pred)
    n, k = truth.shape
    inter = (truth & pred).sum(axis=1)
    c_true = truth.sum(axis=1)
    c_pred = pred.sum(axis=1)
    union = c_true + c_pred - inter
    both_empty = (c_true == 0) & (c_pred == 0)

    precision = np.where(c_pred > 0, inter / np.maximum(c_pred, 1), both_empty.astype(float))
    recall = np.where(c_true > 0, inter / np.maximum(c_true, 1), both_empty.astype(float))
    f1 = np.where(c_true + c_pred > 0, 2 * inter / np.maximum(c_true + c_pred, 1), 1.0)
    accuracy = np.where(union > 0, inter / np.maximum(union, 1), 1.0)

    # fsum keeps the means exactly rounded, independent of accumulation order
    return EvaluationReport(
        hamming_loss=float((truth ^ pred).sum() / (n * k)),
        precision=math.fsum(precision) / n,
        recall=math.fsum(recall) / n,
        f1=math.fsum(f1) / n,
        accuracy=math.fsum(accuracy) / n,
        n_samples=n,
        degenerate_rows=int(((c_true == 0) | (c_pred == 0)).sum()),
    )


def micro_f1(truth, pred) -> float:
    """Entry-pooled F1 over the whole matrix pair (supplementary)."""
    truth, pred = _check_pair(truth, pred)
    tp = int((truth & pred).sum())
    fp = int(((1 - truth) & pred).sum())
    fn = int((truth & (1 - pred)).sum())
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


def macro_f1(truth, pred) -> float:
    """Per-label F1 averaged over labels (supplementary).

    A label absent from both matrices counts as a perfect 1.
    """
    truth, pred = _check_pair(truth, pred)
    tp = (truth & pred).sum(axis=0)
    fp = ((1 - truth) & pred).sum(axis=0)
    fn = (truth & (1 - pred)).sum(axis=0)
    denom = 2 * tp + fp + fn
    scores = np.where(denom > 0, 2 * tp / np.maximum(denom, 1), 1.0)
    return float(scores.mean())
