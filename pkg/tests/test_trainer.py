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

from hepaclass.data import AugmentationConfig
from hepaclass.exceptions import NonFiniteError, SplitError
from hepaclass.nn import ModelConfig, build_model, load_checkpoint, predict
from hepaclass.training import TrainConfig, TrainState, TRAINING_LOG_COLUMNS, size_pretext_dataset, train, train_step
from hepaclass.training.trainer import BEST_CHECKPOINT_FILE_NAME, TRAINING_LOG_FILE_NAME
from hepaclass.data.dataset import LESIONS_FILE_NAME

from tests.conftest import PreparedData


def _sets(prepared: PreparedData):
    return prepared.dataset.subset(prepared.split.train), prepared.dataset.subset(prepared.split.val)


def test_train(prepared: PreparedData, tiny_model_config: ModelConfig, tmp_path, captured_logger):
    logger, records = captured_logger
    train_set, val_set = _sets(prepared)
    model = build_model(tiny_model_config, rng_seed=0)
    result = train(
        model,
        train_set,
        val_set,
        TrainConfig(batch_size=4, max_epochs=4, plateau_patience=1, seed=0),
        out_dir=str(tmp_path),
        augmentation=AugmentationConfig(),
        workers=2,
        logger=logger,
    )
    log = result.log

    assert list(log.columns) == TRAINING_LOG_COLUMNS
    assert log["epoch"].tolist() == [1, 2, 3, 4]
    assert log["lr"].is_monotonic_decreasing
    assert log["lr"].iloc[0] == 1e-3
    assert result.best_val_accuracy == log["val_acc"].max()
    assert result.best_epoch == int(log["epoch"][log["val_acc"].idxmax()])
    assert result.model.metadata.epoch == result.best_epoch
    assert result.model.metadata.patch_target == (32, 32)
    assert ((log["train_acc"] >= 0) & (log["train_acc"] <= 1)).all()
    assert numpy.all(numpy.isfinite(log["train_loss"]))

    written = pandas.read_csv(os.path.join(str(tmp_path), TRAINING_LOG_FILE_NAME))
    assert written["epoch"].tolist() == [1, 2, 3, 4]

    restored = load_checkpoint(result.checkpoint_path)
    assert result.checkpoint_path == os.path.join(str(tmp_path), BEST_CHECKPOINT_FILE_NAME)
    assert restored.metadata.best_val_accuracy == result.best_val_accuracy
    assert numpy.array_equal(predict(restored, val_set.patches), predict(result.model, val_set.patches))

    messages = [record.getMessage() for record in records]
    assert sum(message.startswith("Epoch ") for message in messages) == 4
    assert any(message.startswith("Training stopped after 4 epochs") for message in messages)


def test_train_deterministic(prepared: PreparedData, tiny_model_config: ModelConfig):
    train_set, val_set = _sets(prepared)
    cfg = TrainConfig(batch_size=4, max_epochs=2, seed=3)
    results = [
        train(
            build_model(tiny_model_config, rng_seed=3),
            train_set,
            val_set,
            cfg,
            augmentation=AugmentationConfig(),
            workers=workers,
        )
        for workers in (1, 3)
    ]
    logs = [result.log.drop(columns=["seconds"]) for result in results]
    states = [result.model.state_dict() for result in results]

    pandas.testing.assert_frame_equal(logs[0], logs[1])
    assert all(numpy.array_equal(states[0][name], states[1][name]) for name in states[0])


def test_train_loss_decreases(prepared: PreparedData, tiny_model_config: ModelConfig):
    tiny_model_config.dropout_rate = 0.0
    train_set, val_set = _sets(prepared)
    result = train(
        build_model(tiny_model_config, rng_seed=1),
        train_set,
        val_set,
        TrainConfig(batch_size=4, max_epochs=12, plateau_patience=100, seed=1),
    )

    assert result.log["train_loss"].iloc[-1] < result.log["train_loss"].iloc[0]


@pytest.mark.parametrize(
    "train_size,val_size",
    [
        (3, 4),
        (12, 0),
    ],
)
def test_train_set_sizes(prepared: PreparedData, tiny_model_config: ModelConfig, train_size: int, val_size: int):
    train_set, val_set = _sets(prepared)
    with pytest.raises(SplitError):
        train(
            build_model(tiny_model_config),
            train_set.subset(train_set.lesion_ids[:train_size]),
            val_set.subset(val_set.lesion_ids[:val_size]),
            TrainConfig(batch_size=4, max_epochs=1),
        )


def test_train_step_non_finite(prepared: PreparedData, tiny_model_config: ModelConfig):
    model = build_model(tiny_model_config)
    model.head.children["fc3"].weight.value[...] = numpy.nan
    state = TrainState.create(TrainConfig())

    with pytest.raises(NonFiniteError):
        train_step(model, prepared.dataset.patches[:4], prepared.dataset.labels[:4], state, 0.3, 0.1)

    assert state.adam.timestep == 0


def test_size_pretext_dataset(prepared: PreparedData):
    lesions = pandas.read_csv(os.path.join(prepared.path, LESIONS_FILE_NAME))
    pretext = size_pretext_dataset(prepared.dataset, lesions)
    volumes = lesions.set_index("lesion_id")["volume_ml"].loc[prepared.dataset.lesion_ids].to_numpy()

    assert pretext.lesion_ids == prepared.dataset.lesion_ids
    assert pretext.patches is prepared.dataset.patches
    assert numpy.array_equal(pretext.labels, (volumes > numpy.median(volumes)).astype(int))
    assert 0 < pretext.labels.sum() < len(pretext)

    with pytest.raises(SplitError):
        size_pretext_dataset(prepared.dataset, lesions.iloc[1:])
