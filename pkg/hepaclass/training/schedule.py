"""
 Plateau learning-rate schedule and early stopping.
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

from enum import Enum


class StopDecision(Enum):
    """
    Early stopping verdict after an epoch.
    """

    CONTINUE = "continue"
    STOP = "stop"


class PlateauScheduler:
    """
     Multiplies the learning rate by `factor` after `patience` consecutive epochs without a strictly better
     validation accuracy, never going below `lr_min`. The counter restarts after each reduction.
    """

    def __init__(self, lr0: float, factor: float = 0.5, patience: int = 10, lr_min: float = 1e-10):
        self.lr = lr0
        self.factor = factor
        self.patience = patience
        self.lr_min = lr_min
        self.best = float("-inf")
        self.wait = 0

    def step(self, val_accuracy: float) -> float:
        """
          Records one epoch result.

        :return: Learning rate for the next epoch.
        """
        if val_accuracy > self.best:
            self.best = val_accuracy
            self.wait = 0
            return self.lr

        self.wait += 1
        if self.wait >= self.patience:
            self.lr = max(self.lr * self.factor, self.lr_min)
            self.wait = 0

        return self.lr


class EarlyStopper:
    """
     Stops after `patience` consecutive epochs without a strictly better validation accuracy,
     or once `max_epochs` epochs are done.
    """

    def __init__(self, patience: int = 50, max_epochs: int = 1000):
        self.patience = patience
        self.max_epochs = max_epochs
        self.best = float("-inf")
        self.wait = 0

    def step(self, epoch: int, val_accuracy: float) -> StopDecision:
        """
          Records the result of `epoch` (1-based).
        """
        if val_accuracy > self.best:
            self.best = val_accuracy
            self.wait = 0
        else:
            self.wait += 1

        if self.wait >= self.patience or epoch >= self.max_epochs:
            return StopDecision.STOP

        return StopDecision.CONTINUE
