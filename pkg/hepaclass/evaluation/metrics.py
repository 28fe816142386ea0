"""
 Classification metrics, ROC curve and AUC.
"""
#  Copyright (c) 2026. Hepaclass contributors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
#

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Dict

import numpy
from dataclasses_json import DataClassJsonMixin

from hepaclass.exceptions import MetricsError

# report column order
METRIC_TITLES: Dict[str, str] = {
    "accuracy": "Accuracy",
    "balanced_accuracy": "Balanced Accuracy",
    "f1": "F1",
    "auc": "AUC",
    "precision": "Precision",
    "recall": "Recall",
    "specificity": "Specificity",
}


@dataclass
class MetricSet(DataClassJsonMixin):
    """
    Binary classification metrics with metastasis as the positive class.
    `undefined` names ratios whose denominator was zero; those are reported as 0.
    """

    accuracy: float
    balanced_accuracy: float
    f1: float
    precision: float
    recall: float
    specificity: float
    auc: float = 0.0
    undefined: List[str] = field(default_factory=list)

    def table_row(self) -> Dict[str, float]:
        """Metrics keyed by report column title, in report order"""
        return {title: getattr(self, name) for name, title in METRIC_TITLES.items()}


@dataclass(frozen=True)
class RocPoint(DataClassJsonMixin):
    """
    One operating point: scores >= threshold are classified positive.
    """

    fpr: float
    tpr: float
    threshold: float


def confusion_matrix(labels: Sequence[int], predicted: Sequence[int]) -> numpy.ndarray:
    """
      2x2 counts, rows true class, columns predicted class, index 0 cyst and 1 metastasis.

    :raises MetricsError: for classes outside {0, 1} or length mismatch.
    """
    labels = numpy.asarray(labels, dtype=numpy.int64)
    predicted = numpy.asarray(predicted, dtype=numpy.int64)
    if labels.shape != predicted.shape:
        raise MetricsError(f"Got {labels.size} labels for {predicted.size} predictions")
    if labels.size and (labels.min() < 0 or labels.max() > 1 or predicted.min() < 0 or predicted.max() > 1):
        raise MetricsError("Labels and predictions must be 0 (cyst) or 1 (metastasis)")

    return numpy.bincount(labels * 2 + predicted, minlength=4).reshape(2, 2)


def _ratio(numerator: float, denominator: float, name: str, undefined: List[str]) -> float:
    if denominator == 0:
        undefined.append(name)
        return 0.0
    return numerator / denominator


def compute_metrics(confusion: numpy.ndarray) -> MetricSet:
    """
      Threshold metrics of a confusion matrix.

    :param confusion: 2x2 non-negative integer counts from `confusion_matrix`.
    :return: Metric set without AUC.
    :raises MetricsError: for negative counts, a wrong shape or an all-zero matrix.
    """
    confusion = numpy.asarray(confusion)
    if confusion.shape != (2, 2):
        raise MetricsError(f"Confusion matrix must be 2x2, got {confusion.shape}")
    if (confusion < 0).any():
        raise MetricsError("Confusion matrix has negative counts")
    total = int(confusion.sum())
    if total == 0:
        raise MetricsError("Confusion matrix is empty")

    (tn, fp), (fn, tp) = confusion.astype(numpy.int64).tolist()
    undefined: List[str] = []
    precision = _ratio(tp, tp + fp, "precision", undefined)
    recall = _ratio(tp, tp + fn, "recall", undefined)
    specificity = _ratio(tn, tn + fp, "specificity", undefined)
    f1 = _ratio(2 * precision * recall, precision + recall, "f1", undefined)

    return MetricSet(
        accuracy=(tp + tn) / total,
        balanced_accuracy=(recall + specificity) / 2,
        f1=f1,
        precision=precision,
        recall=recall,
        specificity=specificity,
        undefined=undefined,
    )


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> Tuple[List[RocPoint], float]:
    """
      ROC curve over every distinct score, highest first, and its trapezoid area.
      Tied scores move along a diagonal, so the area equals the pairwise ranking statistic with ties counted 1/2.

    :param scores: Positive class scores.
    :param labels: 1 for positive, 0 for negative.
    :return: Points from (0, 0, inf) to (1, 1, lowest score), and the AUC.
    :raises MetricsError: if only one class is present.
    """
    scores = numpy.asarray(scores, dtype=numpy.float64)
    labels = numpy.asarray(labels, dtype=numpy.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricsError(f"Got {labels.size} labels for {scores.size} scores")
    if not numpy.isin(labels, [0, 1]).all():
        raise MetricsError("ROC labels must be 0 or 1")
    positives = int(labels.sum())
    negatives = labels.size - positives
    if positives == 0 or negatives == 0:
        raise MetricsError("ROC needs at least one positive and one negative label")

    order = numpy.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    true_positives = numpy.cumsum(labels[order])
    false_positives = numpy.cumsum(1 - labels[order])
    # last position of every distinct score
    ends = numpy.r_[numpy.flatnonzero(numpy.diff(sorted_scores)), sorted_scores.size - 1]

    tpr = numpy.r_[0.0, true_positives[ends] / positives]
    fpr = numpy.r_[0.0, false_positives[ends] / negatives]
    thresholds = numpy.r_[numpy.inf, sorted_scores[ends]]

    points = [RocPoint(fpr=float(x), tpr=float(y), threshold=float(t)) for x, y, t in zip(fpr, tpr, thresholds)]
    return points, float(numpy.sum(numpy.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
