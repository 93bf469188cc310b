"""Confusion-matrix metrics and ROC/AUC."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import DegenerateLabels, LengthMismatch


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @classmethod
    def from_predictions(cls, predicted, actual) -> "ConfusionCounts":
        pred = np.asarray(predicted, dtype=bool)
        act = np.asarray(actual, dtype=bool)
        if pred.shape != act.shape:
            raise LengthMismatch(f"{pred.size} predictions for {act.size} labels")
        return cls(
            int(np.sum(pred & act)),
            int(np.sum(pred & ~act)),
            int(np.sum(~pred & act)),
            int(np.sum(~pred & ~act)),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.total)

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        # equals 2PR/(P+R), but as one integer ratio it rounds exactly once
        return _ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)


@dataclass(frozen=True)
class MetricsReport:
    counts: ConfusionCounts
    accuracy: float
    precision: float
    recall: float
    f1: float
    threshold: float = 0.5
    roc: Optional[list[tuple[float, float]]] = None  # None when only one class is present
    auc: Optional[float] = None
    scores: list[float] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        c = self.counts
        return {
            "tp": c.tp,
            "fp": c.fp,
            "fn": c.fn,
            "tn": c.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc": self.auc,
            "threshold": self.threshold,
        }


def report_from_scores(scores, labels, threshold: float = 0.5) -> MetricsReport:
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    counts = ConfusionCounts.from_predictions(scores >= threshold, labels == 1)
    try:
        roc, auc = roc_auc(scores, labels)
    except DegenerateLabels:
        roc, auc = None, None
    return MetricsReport(
        counts, counts.accuracy, counts.precision, counts.recall, counts.f1, threshold, roc, auc, scores.tolist()
    )


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> tuple[list[tuple[float, float]], float]:
    """ROC points over every distinct score (plus +/-inf sentinels) and the trapezoidal AUC."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = np.asarray(labels).reshape(-1) == 1
    if s.size != y.size:
        raise LengthMismatch(f"{s.size} scores for {y.size} labels")
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("ROC needs at least one positive and one negative label")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    cut = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tps = np.cumsum(y)[cut]
    fps = np.cumsum(~y)[cut]
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:  # pragma: no cover - -inf sentinel always admits everything
        tpr, fpr = np.r_[tpr, 1.0], np.r_[fpr, 1.0]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return list(zip(fpr.tolist(), tpr.tolist())), auc
