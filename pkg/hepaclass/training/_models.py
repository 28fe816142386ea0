"""
 Training configuration and run state.
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
from typing import Optional, Dict, List

import numpy
from dataclasses_json import DataClassJsonMixin, Undefined, config

from hepaclass.exceptions import ConfigError
from hepaclass.training.schedule import PlateauScheduler, EarlyStopper


@dataclass
class TrainConfig(DataClassJsonMixin):
    """
    Optimization protocol. `aux_weight` and `label_smoothing_eps` override the model config when set.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    batch_size: int = 8
    lr0: float = 1e-3
    plateau_patience: int = 10
    plateau_factor: float = 0.5
    lr_min: float = 1e-10
    early_stop_patience: int = 50
    max_epochs: int = 1000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    aux_weight: Optional[float] = None
    label_smoothing_eps: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if not 0 < self.plateau_factor < 1:
            raise ConfigError(f"plateau_factor must be in (0, 1), got {self.plateau_factor}")
        if not 0 <= self.lr_min < self.lr0:
            raise ConfigError(f"lr_min must be below lr0, got lr_min={self.lr_min}, lr0={self.lr0}")
        if self.plateau_patience < 1 or self.early_stop_patience < 1 or self.max_epochs < 1:
            raise ConfigError("plateau_patience, early_stop_patience and max_epochs must be positive")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1) or self.adam_eps <= 0:
            raise ConfigError("Adam betas must be in [0, 1) and eps positive")
        if self.aux_weight is not None and self.aux_weight < 0:
            raise ConfigError(f"aux_weight must be non-negative, got {self.aux_weight}")
        if self.label_smoothing_eps is not None and not 0 <= self.label_smoothing_eps < 1:
            raise ConfigError(f"label_smoothing_eps must be in [0, 1), got {self.label_smoothing_eps}")


@dataclass
class AdamState:
    """
    Adam moment buffers per parameter name and the shared timestep.
    """

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    timestep: int = 0
    first_moments: Dict[str, numpy.ndarray] = field(default_factory=dict)
    second_moments: Dict[str, numpy.ndarray] = field(default_factory=dict)


@dataclass
class EpochRecord:
    """
    One row of the training log.
    """

    epoch: int
    lr: float
    train_loss: float
    train_acc: float
    val_acc: float
    seconds: float


TRAINING_LOG_COLUMNS: List[str] = ["epoch", "lr", "train_loss", "train_acc", "val_acc", "seconds"]


@dataclass
class TrainState:
    """
    Mutable state of a training run. Scheduler and stopper keep their own stagnation counters.
    """

    current_lr: float
    adam: AdamState
    scheduler: PlateauScheduler
    stopper: EarlyStopper
    epoch: int = 0
    best_val_accuracy: float = float("-inf")
    best_epoch: int = 0

    @classmethod
    def create(cls, cfg: TrainConfig) -> "TrainState":
        """Initial state for `cfg`"""
        return cls(
            current_lr=cfg.lr0,
            adam=AdamState(beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps),
            scheduler=PlateauScheduler(
                lr0=cfg.lr0, factor=cfg.plateau_factor, patience=cfg.plateau_patience, lr_min=cfg.lr_min
            ),
            stopper=EarlyStopper(patience=cfg.early_stop_patience, max_epochs=cfg.max_epochs),
        )
