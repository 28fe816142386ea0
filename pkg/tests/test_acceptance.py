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
"""
 End-to-end runs on phantom data. Slow, run with `pytest -m slow`.
"""

import dataclasses
import json
import os

import numpy
import pandas
import pytest

from hepaclass.cli.main import main, EXIT_OK
from hepaclass.nn import ModelConfig, build_model
from hepaclass.phantom import PhantomSpec, generate
from hepaclass.training import TrainConfig, train
from tests.conftest import PreparedData

TINY_MODEL_FLAGS = ["--width-multiplier", "0.25", "--feature-width", "16", "--head-width", "16"]


def _read_bytes(path: str) -> bytes:
    with open(path, "rb") as file:
        return file.read()


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as file:
        return json.load(file)


def _run_pipeline(data_dir: str, out_dir: str, run_flags: list) -> None:
    prepared_dir = os.path.join(out_dir, "prepared")
    train_dir = os.path.join(out_dir, "train")

    assert main(["prepare", "--data", data_dir, "--out", prepared_dir, *run_flags]) == EXIT_OK
    assert main(["train", "--data", prepared_dir, "--out", train_dir, *run_flags]) == EXIT_OK
    assert (
        main(
            [
                "eval",
                "--checkpoint",
                os.path.join(train_dir, "best.ckpt"),
                "--data",
                prepared_dir,
                "--out",
                os.path.join(out_dir, "eval"),
            ]
        )
        == EXIT_OK
    )


@pytest.mark.slow
def test_overfit_small_subset(prepared: PreparedData, tiny_model_config: ModelConfig):
    subset = prepared.dataset.subset(sorted(prepared.dataset.lesion_ids)[:16])
    model = build_model(dataclasses.replace(tiny_model_config, dropout_rate=0.0), rng_seed=0)

    result = train(
        model,
        subset,
        subset,
        TrainConfig(batch_size=8, max_epochs=200, early_stop_patience=200, seed=0),
        augmentation=None,
        workers=2,
    )

    assert result.log["train_acc"].max() == 1.0


@pytest.mark.slow
def test_pipeline_deterministic(phantom_dir: str, tmp_path):
    run_flags = [
        "--seed",
        "4",
        "--target-size",
        "32",
        "32",
        "--input-size",
        "32",
        "32",
        "--batch-size",
        "4",
        "--max-epochs",
        "3",
        *TINY_MODEL_FLAGS,
    ]
    first, second = str(tmp_path / "first"), str(tmp_path / "second")
    _run_pipeline(phantom_dir, first, run_flags + ["--workers", "1"])
    _run_pipeline(phantom_dir, second, run_flags + ["--workers", "3"])

    for file_name in [
        "prepared/split.json",
        "prepared/patches.npz",
        "prepared/lesions.csv",
        "train/best.ckpt",
        "eval/metrics.csv",
        "eval/roc.csv",
        "eval/confusion.csv",
    ]:
        assert _read_bytes(os.path.join(first, file_name)) == _read_bytes(os.path.join(second, file_name)), file_name

    first_log = pandas.read_csv(os.path.join(first, "train", "training_log.csv")).drop(columns=["seconds"])
    second_log = pandas.read_csv(os.path.join(second, "train", "training_log.csv")).drop(columns=["seconds"])
    pandas.testing.assert_frame_equal(first_log, second_log)

    first_report = _read_json(os.path.join(first, "eval", "report.json"))
    second_report = _read_json(os.path.join(second, "eval", "report.json"))
    first_report.pop("mean_inference_ms")
    second_report.pop("mean_inference_ms")
    assert first_report == second_report


def _epochs_to_accuracy(train_dir: str, accuracy: float, max_epochs: int) -> int:
    """First epoch whose validation accuracy reaches `accuracy`, `max_epochs + 1` if none does."""
    log = pandas.read_csv(os.path.join(train_dir, "training_log.csv"))
    reached = log.loc[log["val_acc"] >= accuracy, "epoch"]
    return int(reached.iloc[0]) if len(reached) else max_epochs + 1


@pytest.mark.slow
def test_pretext_pretraining_converges_no_slower(tiny_phantom_spec: PhantomSpec, tmp_path):
    max_epochs = 30
    run_flags = [
        "--target-size",
        "32",
        "32",
        "--input-size",
        "32",
        "32",
        "--batch-size",
        "4",
        "--max-epochs",
        str(max_epochs),
        "--workers",
        "2",
        *TINY_MODEL_FLAGS,
    ]
    pretext_data, target_data = str(tmp_path / "pretext_phantom"), str(tmp_path / "target_phantom")
    pretext_run, target_prepared = str(tmp_path / "pretext"), str(tmp_path / "target_prepared")
    assert (
        main(
            [
                "gen-phantom",
                "--out",
                pretext_data,
                "--seed",
                "11",
                "--count",
                "40",
                "--cyst-mean-ml",
                "0.6",
                "--metastasis-mean-ml",
                "2.5",
            ]
        )
        == EXIT_OK
    )
    assert main(["train", "--data", pretext_data, "--out", pretext_run, "--pretext", *run_flags]) == EXIT_OK

    generate(dataclasses.replace(tiny_phantom_spec, n_lesions=40), target_data)
    assert main(["prepare", "--data", target_data, "--out", target_prepared, *run_flags]) == EXIT_OK

    pretrained_flags = ["--pretrained", os.path.join(pretext_run, "best.ckpt"), "--pretrained-skip-head", "true"]
    scratch_epochs, pretrained_epochs = [], []
    for seed in ["0", "1", "2"]:
        scratch_dir, pretrained_dir = str(tmp_path / f"scratch_{seed}"), str(tmp_path / f"pretrained_{seed}")
        common = ["train", "--data", target_prepared, "--seed", seed, *run_flags]
        assert main([*common, "--out", scratch_dir]) == EXIT_OK
        assert main([*common, "--out", pretrained_dir, *pretrained_flags]) == EXIT_OK

        scratch_epochs.append(_epochs_to_accuracy(scratch_dir, 0.90, max_epochs))
        pretrained_epochs.append(_epochs_to_accuracy(pretrained_dir, 0.90, max_epochs))

    assert numpy.mean(pretrained_epochs) <= numpy.mean(scratch_epochs), (pretrained_epochs, scratch_epochs)


@pytest.mark.slow
def test_desk_scale_classification(tmp_path):
    data_dir = str(tmp_path / "phantom")
    assert main(["gen-phantom", "--out", data_dir, "--seed", "0"]) == EXIT_OK

    _run_pipeline(data_dir, str(tmp_path), ["--seed", "0"])

    report = _read_json(os.path.join(tmp_path, "eval", "report.json"))
    assert report["lesion_count"] == 46
    assert report["metrics"]["accuracy"] >= 0.90
    assert report["metrics"]["auc"] >= 0.95
