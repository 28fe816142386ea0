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

import numpy
import pandas
import pytest

from hepaclass.evaluation import build_report, compare_models, evaluate, predict_dataset, write_report
from hepaclass.evaluation.report import (
    REPORT_FILE_NAME,
    METRICS_FILE_NAME,
    ROC_FILE_NAME,
    CONFUSION_FILE_NAME,
    COMPARISON_FILE_NAME,
    COMPARISON_ROC_FILE_NAME,
)
from hepaclass.exceptions import MetricsError
from hepaclass.nn import ModelConfig, build_model, save_checkpoint
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat

from tests.conftest import PreparedData

REPORT_COLUMNS = ["Accuracy", "Balanced Accuracy", "F1", "AUC", "Precision", "Recall", "Specificity"]


def _report_without_timing(report) -> dict:
    summary = report.summary()
    summary.pop("mean_inference_ms")
    summary["roc"] = report.roc_frame().to_dict(orient="list")
    return summary


def test_build_report():
    probabilities = numpy.array([[0.2, 0.8], [0.6, 0.4], [0.9, 0.1], [0.3, 0.7], [0.45, 0.55]])
    report = build_report(["d", "c", "b", "a", "e"], numpy.array([1, 1, 0, 0, 0]), probabilities, 2.5)

    assert report.confusion == [[1, 2], [1, 1]]
    assert numpy.sum(report.confusion) == report.lesion_count == 5
    assert list(report.lesion_scores) == ["a", "b", "c", "d", "e"]
    assert report.lesion_scores["d"] == pytest.approx(0.8)
    assert report.metrics.auc == pytest.approx(4 / 6)
    assert list(report.metrics_frame().columns) == REPORT_COLUMNS
    assert report.confusion_frame()["true"].tolist() == ["cyst", "metastasis"]
    assert list(report.roc_frame().columns) == ["fpr", "tpr", "threshold"]


@pytest.mark.parametrize(
    "labels",
    [
        numpy.array([0, -1]),
        numpy.array([1, 1]),
        numpy.array([], dtype=int),
    ],
)
def test_build_report_invalid(labels: numpy.ndarray):
    with pytest.raises(MetricsError):
        build_report([str(index) for index in range(labels.size)], labels, numpy.full((labels.size, 2), 0.5))


def test_evaluate(prepared: PreparedData, tiny_model_config: ModelConfig, tmp_path, captured_logger):
    logger, records = captured_logger
    model = build_model(tiny_model_config, rng_seed=0)
    test_set = prepared.dataset.subset(prepared.split.test)

    report = evaluate(model, test_set, workers=2, logger=logger)
    write_report(report, str(tmp_path))

    assert report.lesion_count == 4
    assert numpy.sum(report.confusion) == 4
    assert _report_without_timing(evaluate(model, test_set, workers=1)) == _report_without_timing(report)
    assert report.mean_inference_ms > 0
    assert any(record.getMessage().startswith("Evaluated 4 lesions") for record in records)

    for file_name in [REPORT_FILE_NAME, METRICS_FILE_NAME, ROC_FILE_NAME, CONFUSION_FILE_NAME]:
        assert os.path.isfile(tmp_path / file_name)
    assert list(pandas.read_csv(tmp_path / METRICS_FILE_NAME).columns) == REPORT_COLUMNS
    written = LocalStorage().read_blob(str(tmp_path / REPORT_FILE_NAME), DictJsonSerializationFormat)
    assert written["confusion"] == report.confusion
    assert written["lesion_scores"] == report.lesion_scores


def test_evaluate_order_invariant(prepared: PreparedData, tiny_model_config: ModelConfig):
    model = build_model(tiny_model_config, rng_seed=4)
    ids = prepared.split.val + prepared.split.test
    forward = evaluate(model, prepared.dataset.subset(ids), workers=2)
    backward = evaluate(model, prepared.dataset.subset(list(reversed(ids))), workers=2)

    assert _report_without_timing(forward) == _report_without_timing(backward)


def test_predict_dataset(prepared: PreparedData, tiny_model_config: ModelConfig):
    model = build_model(tiny_model_config, rng_seed=0)
    single = predict_dataset(model, prepared.dataset, batch_size=1, workers=2)

    assert single.probabilities.shape == (20, 2)
    assert numpy.allclose(single.probabilities.sum(axis=1), 1.0, atol=1e-6)
    assert single.lesion_ids == prepared.dataset.lesion_ids
    assert 0.0 <= single.accuracy <= 1.0
    assert numpy.array_equal(single.predicted, numpy.argmax(single.probabilities, axis=1))


def test_compare_models(prepared: PreparedData, tiny_model_config: ModelConfig, tmp_path):
    plain_path, residual_path = str(tmp_path / "plain.ckpt"), str(tmp_path / "residual.ckpt")
    save_checkpoint(build_model(tiny_model_config, rng_seed=0), plain_path)
    tiny_model_config.backbone = "inception_residual"
    save_checkpoint(build_model(tiny_model_config, rng_seed=0), residual_path)
    test_set = prepared.dataset.subset(prepared.split.test)

    comparison = compare_models(
        {"plain": plain_path, "residual": residual_path}, test_set, out_dir=str(tmp_path), workers=2
    )

    assert list(comparison.columns) == ["model", *REPORT_COLUMNS]
    assert comparison["model"].tolist() == ["plain", "residual"]
    assert pandas.read_csv(tmp_path / COMPARISON_FILE_NAME)["model"].tolist() == ["plain", "residual"]
    roc = pandas.read_csv(tmp_path / COMPARISON_ROC_FILE_NAME)
    assert list(roc.columns) == ["model", "fpr", "tpr", "threshold"]
    assert set(roc["model"]) == {"plain", "residual"}
