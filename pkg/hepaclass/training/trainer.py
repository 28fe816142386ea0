"""
 Training loop: auxiliary-loss mixing, Adam, plateau schedule, early stopping and best-model checkpoints.
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
from dataclasses import dataclass
from typing import Optional, Tuple, Dict, List

import numpy
import pandas

from hepaclass.data import PatchDataset, BatchStream, AugmentationConfig
from hepaclass.evaluation.inference import predict_dataset
from hepaclass.exceptions import NonFiniteError, SplitError
from hepaclass.logs import SemanticLogger
from hepaclass.nn import Model, save_checkpoint
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DataFrameCsvSerializationFormat
from hepaclass.tensor import Tensor, smoothed_cross_entropy
from hepaclass.training._models import TrainConfig, TrainState, EpochRecord, TRAINING_LOG_COLUMNS
from hepaclass.training.optim import adam_step
from hepaclass.training.schedule import StopDecision
from hepaclass.utils import operation_time, run_time_logged

BEST_CHECKPOINT_FILE_NAME = "best.ckpt"
TRAINING_LOG_FILE_NAME = "training_log.csv"


@dataclass
class TrainResult:
    """
    Outcome of a training run. `model` holds the weights of the best validation epoch.
    """

    model: Model
    log: pandas.DataFrame
    best_epoch: int
    best_val_accuracy: float
    checkpoint_path: Optional[str] = None


def train_step(
    model: Model, batch: Tensor, labels: numpy.ndarray, state: TrainState, aux_weight: float, smoothing: float
) -> Tuple[float, int]:
    """
      One optimization step on a batch: smoothed cross-entropy of the main logits plus `aux_weight` times
      the smoothed cross-entropy of the auxiliary logits, then an Adam update at the current learning rate.

    :return: (batch loss, number of correctly classified rows).
    :raises NonFiniteError: if the loss or a gradient is NaN or Inf.
    """
    model.zero_grad()
    logits, aux_logits = model.forward_with_aux(batch, training=True)
    loss, dlogits = smoothed_cross_entropy(logits, labels, smoothing)

    daux = None
    if aux_weight > 0:
        aux_loss, daux = smoothed_cross_entropy(aux_logits, labels, smoothing)
        loss += aux_weight * aux_loss
        daux = daux * aux_weight

    if not numpy.isfinite(loss):
        raise NonFiniteError("loss", f"epoch {state.epoch}, learning rate {state.current_lr:g}")

    model.backward(dlogits, daux)
    named = list(model.named_parameters())
    adam_step(
        {name: parameter.value for name, parameter in named},
        {name: parameter.grad for name, parameter in named},
        state.adam,
        state.current_lr,
    )

    return float(loss), int(numpy.sum(numpy.argmax(logits, axis=1) == labels))


def _snapshot(model: Model) -> Dict[str, numpy.ndarray]:
    return {name: value.copy() for name, value in model.state_dict().items()}


@run_time_logged("train")
def train(
    model: Model,
    train_set: PatchDataset,
    val_set: PatchDataset,
    cfg: TrainConfig,
    out_dir: Optional[str] = None,
    augmentation: Optional[AugmentationConfig] = None,
    workers: Optional[int] = None,
    logger: Optional[SemanticLogger] = None,
) -> TrainResult:
    """
      Trains `model` in place until early stopping or `cfg.max_epochs`.

      Every epoch streams a freshly shuffled and augmented pass over `train_set` in batches of `cfg.batch_size`,
      then measures inference-mode accuracy on `val_set`, updates the learning rate and checks early stopping.
      A strictly better validation accuracy makes a new best model (ties keep the earliest epoch); it is
      written to `<out_dir>/best.ckpt` atomically. The log is rewritten to `<out_dir>/training_log.csv`
      after every epoch.

    :param model: Initialized or pretrained model, updated in place.
    :param train_set: Training patches.
    :param val_set: Validation patches.
    :param cfg: Optimization settings.
    :param out_dir: Directory for the checkpoint and log, nothing is written if not provided.
    :param augmentation: Train-time augmentation, None for no augmentation.
    :param workers: Batch builder threads.
    :param logger: Optional logger.
    :return: The model restored to its best validation epoch, with the training log.
    """
    if len(train_set) < cfg.batch_size:
        raise SplitError(f"Training set has {len(train_set)} lesions, fewer than one batch of {cfg.batch_size}")
    if len(val_set) == 0:
        raise SplitError("Validation set is empty")

    aux_weight = cfg.aux_weight if cfg.aux_weight is not None else model.config.aux_weight
    smoothing = cfg.label_smoothing_eps if cfg.label_smoothing_eps is not None else model.config.label_smoothing_eps
    model.metadata.seed = cfg.seed
    model.metadata.patch_target = tuple(train_set.patches.shape[2:])

    storage = LocalStorage()
    checkpoint_path = os.path.join(out_dir, BEST_CHECKPOINT_FILE_NAME) if out_dir else None
    state = TrainState.create(cfg)
    records: List[EpochRecord] = []
    best_blobs = _snapshot(model)

    while True:
        state.epoch += 1
        with operation_time() as ot:
            stream = BatchStream(
                train_set,
                batch_size=cfg.batch_size,
                input_size=model.config.input_size,
                seed=cfg.seed,
                epoch=state.epoch,
                augmentation=augmentation,
                shuffle=True,
                workers=workers,
            )
            losses, correct, seen = [], 0, 0
            for batch, labels in stream:
                loss, batch_correct = train_step(model, batch, labels, state, aux_weight, smoothing)
                losses.append(loss)
                correct += batch_correct
                seen += len(labels)

            val_accuracy = predict_dataset(model, val_set, batch_size=cfg.batch_size, workers=1).accuracy

        records.append(
            EpochRecord(
                epoch=state.epoch,
                lr=state.current_lr,
                train_loss=float(numpy.mean(losses)),
                train_acc=correct / seen,
                val_acc=val_accuracy,
                seconds=round(ot.elapsed / 1e9, 3),
            )
        )

        if val_accuracy > state.best_val_accuracy:
            state.best_val_accuracy = val_accuracy
            state.best_epoch = state.epoch
            model.metadata.epoch = state.epoch
            model.metadata.best_val_accuracy = val_accuracy
            best_blobs = _snapshot(model)
            if checkpoint_path:
                save_checkpoint(model, checkpoint_path, logger=logger)

        log = pandas.DataFrame([record.__dict__ for record in records], columns=TRAINING_LOG_COLUMNS)
        if out_dir:
            storage.save_data_as_blob(
                log, os.path.join(out_dir, TRAINING_LOG_FILE_NAME), DataFrameCsvSerializationFormat
            )

        if logger:
            logger.info(
                "Epoch {epoch}: lr {lr:.3g}, train loss {train_loss:.4f}, train acc {train_acc:.3f}, "
                "val acc {val_acc:.3f}",
                **records[-1].__dict__,
            )

        state.current_lr = state.scheduler.step(val_accuracy)
        if state.stopper.step(state.epoch, val_accuracy) == StopDecision.STOP:
            break

    model.load_state_dict(best_blobs)
    model.metadata.epoch = state.best_epoch
    model.metadata.best_val_accuracy = state.best_val_accuracy

    if logger:
        logger.info(
            "Training stopped after {epochs} epochs, best val acc {best_val_accuracy:.3f} at epoch {best_epoch}",
            epochs=state.epoch,
            best_val_accuracy=state.best_val_accuracy,
            best_epoch=state.best_epoch,
        )

    return TrainResult(
        model=model,
        log=log,
        best_epoch=state.best_epoch,
        best_val_accuracy=state.best_val_accuracy,
        checkpoint_path=checkpoint_path,
    )
