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

import json
import os
import struct

import pandas
import pytest

from hepaclass.cli.config import RunConfig, config_flags
from hepaclass.cli.main import main, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE
from hepaclass.exceptions import ConfigError
from hepaclass.storage.format import CHECKPOINT_MAGIC
from tests.conftest import PreparedData

TINY_MODEL_FLAGS = ["--width-multiplier", "0.25", "--feature-width", "16", "--head-width", "16"]


def test_config_flags():
    flags = {flag.flag: flag for flag in config_flags()}

    assert len(flags) == len(config_flags())
    assert flags["--seed"].key == "seed"
    assert flags["--augment"].key == "augmentation.enabled"
    assert flags["--aux-weight"].key == "model.aux_weight"
    assert flags["--train-aux-weight"].key == "train.aux_weight"
    assert flags["--max-epochs"].key == "train.max_epochs"
    assert flags["--input-size"].nargs == 2
    assert flags["--workers"].value_type is int
    assert "--train-seed" not in flags
    assert not [flag for flag in flags if "dataclass" in flag]


def test_run_config_overrides():
    run_config = RunConfig().with_overrides({"seed": 7, "train.max_epochs": 3, "model.input_size": [64, 48]})

    assert run_config.train_config().seed == 7
    assert run_config.train.max_epochs == 3
    assert run_config.model.input_size == (64, 48)
    assert RunConfig.parse(run_config.to_dict()) == run_config


@pytest.mark.parametrize(
    "overrides",
    [
        {"train.epochs": 3},
        {"optimizer.lr0": 0.1},
        {"train.max_epochs": 0},
        {"split_strategy": "by_scanner"},
    ],
)
def test_run_config_invalid_overrides(overrides):
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(overrides)


def test_run_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 3, "train": {"batch_size": 4}}), encoding="utf-8")
    run_config = RunConfig.from_file(str(path))

    assert run_config.seed == 3
    assert run_config.train.batch_size == 4
    assert run_config.train.lr0 == 1e-3

    path.write_text(json.dumps({"train": {"batch": 4}}), encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(path))


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["--help"], EXIT_OK),
        ([], EXIT_USAGE),
        (["train", "--out", "/tmp/unused"], EXIT_USAGE),
        (["segment", "--out", "/tmp/unused"], EXIT_USAGE),
        (["prepare", "--data", "d", "--out", "o", "--augment", "maybe"], EXIT_USAGE),
    ],
)
def test_main_usage(argv, expected: int):
    assert main(argv) == expected


def test_main_config_errors(phantom_dir: str, tmp_path):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"model": {"depth": 3}}), encoding="utf-8")

    assert main(["prepare", "--data", phantom_dir, "--out", str(tmp_path / "a"), "--max-epochs", "0"]) == EXIT_USAGE
    assert main(["prepare", "--data", phantom_dir, "--out", str(tmp_path / "b"), "--config", str(config_path)]) == 2
    assert not os.path.exists(tmp_path / "a")
    assert main(["compare", "--checkpoint", "nopath", "--data", phantom_dir, "--out", str(tmp_path)]) == EXIT_USAGE


def test_main_runtime_errors(tmp_path):
    missing = str(tmp_path / "missing")

    assert main(["eval", "--checkpoint", missing, "--data", missing, "--out", str(tmp_path)]) == EXIT_RUNTIME
    assert main(["prepare", "--data", missing, "--out", str(tmp_path / "out")]) == EXIT_RUNTIME


def test_main_incomplete_checkpoint(prepared: PreparedData, tmp_path):
    header = json.dumps({"format_version": 1, "metadata": {}}).encode("utf-8")
    checkpoint = tmp_path / "broken.ckpt"
    checkpoint.write_bytes(CHECKPOINT_MAGIC + struct.pack("<Q", len(header)) + header)

    argv = ["eval", "--checkpoint", str(checkpoint), "--data", prepared.path, "--out", str(tmp_path / "eval")]
    assert main(argv) == EXIT_RUNTIME


def test_main_gen_phantom(tmp_path):
    out_dir = str(tmp_path / "phantom")

    assert main(["gen-phantom", "--out", out_dir, "--count", "5", "--seed", "2"]) == EXIT_OK
    assert len(pandas.read_csv(os.path.join(out_dir, "manifest.csv"))) == 5


def test_main_gen_phantom_volume_distribution(tmp_path):
    shifted = ["--count", "4", "--cyst-mean-ml", "0.6", "--metastasis-mean-ml", "2.5"]

    assert main(["gen-phantom", "--out", str(tmp_path / "shifted"), *shifted]) == EXIT_OK
    assert main(["gen-phantom", "--out", str(tmp_path / "bad"), "--cyst-mean-ml", "0"]) == EXIT_USAGE


def test_main_workflow(phantom_dir: str, tmp_path):
    prepared_dir, train_dir = str(tmp_path / "prepared"), str(tmp_path / "train")
    checkpoint = os.path.join(train_dir, "best.ckpt")

    assert main(["prepare", "--data", phantom_dir, "--out", prepared_dir, "--target-size", "32", "32"]) == EXIT_OK
    assert (
        main(
            [
                "train",
                "--data",
                prepared_dir,
                "--out",
                train_dir,
                "--seed",
                "5",
                "--max-epochs",
                "2",
                "--batch-size",
                "4",
                "--input-size",
                "32",
                "32",
                "--augment",
                "false",
                *TINY_MODEL_FLAGS,
            ]
        )
        == EXIT_OK
    )

    with open(os.path.join(train_dir, "config.json"), encoding="utf-8") as config_file:
        written = json.load(config_file)
    assert written["seed"] == 5
    assert written["augmentation"]["enabled"] is False
    assert written["train"]["max_epochs"] == 2
    assert len(pandas.read_csv(os.path.join(train_dir, "training_log.csv"))) == 2

    eval_dir = str(tmp_path / "eval")
    assert main(["eval", "--checkpoint", checkpoint, "--data", prepared_dir, "--out", eval_dir]) == EXIT_OK
    metrics = pandas.read_csv(os.path.join(eval_dir, "metrics.csv"))
    assert list(metrics.columns) == ["Accuracy", "Balanced Accuracy", "F1", "AUC", "Precision", "Recall", "Specificity"]

    predict_dir = str(tmp_path / "predict")
    volume = os.path.join(phantom_dir, "volumes", "patient_0000")
    mask = os.path.join(phantom_dir, "masks", "patient_0000")
    assert (
        main(["predict", "--checkpoint", checkpoint, "--volume", volume, "--mask", mask, "--out", predict_dir])
        == EXIT_OK
    )
    with open(os.path.join(predict_dir, "predictions.json"), encoding="utf-8") as predictions_file:
        predictions = json.load(predictions_file)
    assert all(lesion_id.startswith("patient_0000-") for lesion_id in predictions)
    assert all(value["predicted"] in ("cyst", "metastasis") for value in predictions.values())
    assert all(value["cyst"] + value["metastasis"] == pytest.approx(1.0, abs=1e-5) for value in predictions.values())
    assert os.listdir(os.path.join(predict_dir, "overlays"))

    compare_dir = str(tmp_path / "compare")
    assert (
        main(
            [
                "compare",
                "--checkpoint",
                f"first={checkpoint}",
                "--checkpoint",
                f"second={checkpoint}",
                "--data",
                prepared_dir,
                "--out",
                compare_dir,
            ]
        )
        == EXIT_OK
    )
    comparison = pandas.read_csv(os.path.join(compare_dir, "comparison.csv"))
    assert comparison["model"].tolist() == ["first", "second"]
    assert comparison.iloc[0, 1:].tolist() == comparison.iloc[1, 1:].tolist()


def test_main_train_prepares_raw_data(phantom_dir: str, tmp_path):
    train_dir = str(tmp_path / "train")
    argv = ["train", "--data", phantom_dir, "--out", train_dir, "--max-epochs", "1", "--batch-size", "4"]

    assert main(argv + ["--target-size", "32", "32", "--input-size", "32", "32", *TINY_MODEL_FLAGS]) == EXIT_OK
    assert os.path.isfile(os.path.join(train_dir, "prepared", "patches.npz"))
    assert os.path.isfile(os.path.join(train_dir, "best.ckpt"))
