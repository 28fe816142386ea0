"""
 Evaluation reports and model comparison.
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

import os
from dataclasses import dataclass, field
from typing import List, Dict, Optional

import numpy
import pandas
from dataclasses_json import DataClassJsonMixin

from hepaclass.data import PatchDataset, LABELS
from hepaclass.evaluation.inference import predict_dataset
from hepaclass.evaluation.metrics import MetricSet, RocPoint, METRIC_TITLES, confusion_matrix, compute_metrics, roc_auc
from hepaclass.exceptions import MetricsError
from hepaclass.logs import SemanticLogger
from hepaclass.nn import Model, load_checkpoint
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat, DataFrameCsvSerializationFormat

REPORT_FILE_NAME = "report.json"
METRICS_FILE_NAME = "metrics.csv"
ROC_FILE_NAME = "roc.csv"
CONFUSION_FILE_NAME = "confusion.csv"
COMPARISON_FILE_NAME = "comparison.csv"
COMPARISON_ROC_FILE_NAME = "roc_comparison.csv"

POSITIVE_CLASS = LABELS.index("metastasis")


@dataclass
class EvalReport(DataClassJsonMixin):
    """
    Test set results. `lesion_scores` holds the metastasis probability of every lesion, keyed by lesion id.
    """

    confusion: List[List[int]]
    metrics: MetricSet
    roc_points: List[RocPoint]
    lesion_count: int
    mean_inference_ms: float = 0.0
    lesion_scores: Dict[str, float] = field(default_factory=dict)

    def metrics_frame(self) -> pandas.DataFrame:
        """One row of metrics in report column order"""
        return pandas.DataFrame([self.metrics.table_row()], columns=list(METRIC_TITLES.values()))

    def roc_frame(self) -> pandas.DataFrame:
        """ROC points as fpr, tpr, threshold rows"""
        return pandas.DataFrame([point.to_dict() for point in self.roc_points], columns=["fpr", "tpr", "threshold"])

    def confusion_frame(self) -> pandas.DataFrame:
        """Confusion matrix with a leading `true` label column"""
        frame = pandas.DataFrame(self.confusion, columns=list(LABELS))
        frame.insert(0, "true", list(LABELS))
        return frame

    def summary(self) -> dict:
        """Contents of report.json"""
        return {
            "lesion_count": self.lesion_count,
            "confusion": self.confusion,
            "metrics": self.metrics.to_dict(),
            "mean_inference_ms": self.mean_inference_ms,
            "lesion_scores": self.lesion_scores,
        }


def build_report(
    lesion_ids: List[str], labels: numpy.ndarray, probabilities: numpy.ndarray, mean_inference_ms: float = 0.0
) -> EvalReport:
    """
      Assembles a report from per-lesion class probabilities. The argmax class is the prediction,
      the metastasis probability is the ROC score.

    :raises MetricsError: for unlabelled rows or a test set without both classes.
    """
    labels = numpy.asarray(labels, dtype=numpy.int64)
    if labels.size == 0:
        raise MetricsError("Test set is empty")
    if (labels < 0).any():
        raise MetricsError("Test set has unlabelled lesions")

    confusion = confusion_matrix(labels, numpy.argmax(probabilities, axis=1))
    metrics = compute_metrics(confusion)
    scores = probabilities[:, POSITIVE_CLASS]
    roc_points, metrics.auc = roc_auc(scores, labels)

    return EvalReport(
        confusion=confusion.tolist(),
        metrics=metrics,
        roc_points=roc_points,
        lesion_count=int(labels.size),
        mean_inference_ms=mean_inference_ms,
        lesion_scores={lesion_id: float(score) for lesion_id, score in sorted(zip(lesion_ids, scores))},
    )


def evaluate(
    model: Model, test_set: PatchDataset, workers: Optional[int] = None, logger: Optional[SemanticLogger] = None
) -> EvalReport:
    """
      Predicts every test lesion on its own and scores the predictions.

    :param model: Classifier.
    :param test_set: Labelled test patches with both classes.
    :param workers: Inference threads.
    :param logger: Optional logger.
    :return: Report, independent of test set order except for the timing.
    """
    prediction = predict_dataset(model, test_set, batch_size=1, workers=workers)
    report = build_report(
        prediction.lesion_ids, prediction.labels, prediction.probabilities, prediction.mean_inference_ms
    )
    if logger:
        logger.info(
            "Evaluated {lesion_count} lesions: accuracy {accuracy:.4f}, AUC {auc:.4f}, "
            "{mean_inference_ms:.1f} ms per lesion",
            lesion_count=report.lesion_count,
            accuracy=report.metrics.accuracy,
            auc=report.metrics.auc,
            mean_inference_ms=report.mean_inference_ms,
        )
        if report.metrics.undefined:
            logger.warning("Undefined metrics reported as 0: {metrics}", metrics=", ".join(report.metrics.undefined))

    return report


def write_report(report: EvalReport, out_dir: str) -> None:
    """
      Writes report.json, metrics.csv, roc.csv and confusion.csv to `out_dir`.
    """
    storage = LocalStorage()
    storage.save_data_as_blob(report.summary(), os.path.join(out_dir, REPORT_FILE_NAME), DictJsonSerializationFormat)
    storage.save_data_as_blob(
        report.metrics_frame(), os.path.join(out_dir, METRICS_FILE_NAME), DataFrameCsvSerializationFormat
    )
    storage.save_data_as_blob(report.roc_frame(), os.path.join(out_dir, ROC_FILE_NAME), DataFrameCsvSerializationFormat)
    storage.save_data_as_blob(
        report.confusion_frame(), os.path.join(out_dir, CONFUSION_FILE_NAME), DataFrameCsvSerializationFormat
    )


def compare_models(
    checkpoints: Dict[str, str],
    test_set: PatchDataset,
    out_dir: Optional[str] = None,
    workers: Optional[int] = None,
    logger: Optional[SemanticLogger] = None,
) -> pandas.DataFrame:
    """
      Evaluates several checkpoints on one test set.

    :param checkpoints: Checkpoint path by model name.
    :param test_set: Labelled test patches.
    :param out_dir: If provided, receives comparison.csv and roc_comparison.csv (model, fpr, tpr, threshold).
    :param workers: Inference threads.
    :param logger: Optional logger.
    :return: One row per model: `model` followed by the metrics in report column order.
    """
    rows, roc_frames = [], []
    for name, path in checkpoints.items():
        report = evaluate(load_checkpoint(path), test_set, workers=workers, logger=logger)
        rows.append({"model": name, **report.metrics.table_row()})
        roc = report.roc_frame()
        roc.insert(0, "model", name)
        roc_frames.append(roc)

    comparison = pandas.DataFrame(rows, columns=["model", *METRIC_TITLES.values()])
    if out_dir:
        storage = LocalStorage()
        storage.save_data_as_blob(
            comparison, os.path.join(out_dir, COMPARISON_FILE_NAME), DataFrameCsvSerializationFormat
        )
        storage.save_data_as_blob(
            pandas.concat(roc_frames, ignore_index=True),
            os.path.join(out_dir, COMPARISON_ROC_FILE_NAME),
            DataFrameCsvSerializationFormat,
        )

    return comparison
