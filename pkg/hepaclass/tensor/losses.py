"""
 Label-smoothed cross entropy.
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

from typing import Tuple

import numpy

from hepaclass.exceptions import KernelArgumentError, ShapeMismatchError
from hepaclass.tensor._tensor import Tensor, require_ndim
from hepaclass.tensor.activations import softmax, log_softmax

LABEL_SMOOTHING_EPSILON = 0.1


def smoothed_targets(labels: numpy.ndarray, num_classes: int, epsilon: float) -> Tensor:
    """
      Smoothed one-hot targets (1 - epsilon) * onehot + epsilon / K.

    :param labels: Integer class indices of shape (N,).
    :param num_classes: K.
    :param epsilon: Smoothing amount in [0, 1).
    :return: float64 targets of shape (N, K).
    """
    if not 0 <= epsilon < 1:
        raise KernelArgumentError(f"Label smoothing epsilon must be in [0, 1), got {epsilon}")

    labels = numpy.asarray(labels)
    if labels.ndim != 1:
        raise ShapeMismatchError("smoothed_cross_entropy", "labels ndim", 1, labels.ndim)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise KernelArgumentError(f"Label indices must be in [0, {num_classes}), got {labels.tolist()}")

    targets = numpy.full((labels.shape[0], num_classes), epsilon / num_classes, dtype=numpy.float64)
    targets[numpy.arange(labels.shape[0]), labels] += 1 - epsilon
    return targets


def smoothed_cross_entropy(
    logits: Tensor, labels: numpy.ndarray, epsilon: float = LABEL_SMOOTHING_EPSILON
) -> Tuple[float, Tensor]:
    """
      Mean cross entropy of a batch of logits against label-smoothed targets.

    :param logits: Logits of shape (N, K).
    :param labels: Integer class indices of shape (N,).
    :param epsilon: Smoothing amount in [0, 1).
    :return: (loss, dlogits) where dlogits = (softmax(logits) - targets) / N.
    """
    require_ndim("smoothed_cross_entropy", logits, 2)
    batch_size, num_classes = logits.shape
    if numpy.asarray(labels).shape[:1] != (batch_size,):
        raise ShapeMismatchError("smoothed_cross_entropy", "N (labels)", batch_size, numpy.asarray(labels).shape)

    targets = smoothed_targets(labels, num_classes, epsilon)
    loss = float(-(targets * log_softmax(logits)).sum() / batch_size)
    dlogits = (softmax(logits.astype(numpy.float64)) - targets) / batch_size

    return loss, dlogits.astype(logits.dtype)
