"""
 Batch normalization and dropout kernels.
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

from dataclasses import dataclass
from typing import Tuple, Optional

import numpy

from hepaclass.exceptions import ShapeMismatchError, KernelArgumentError
from hepaclass.tensor._models import Mode
from hepaclass.tensor._tensor import Tensor

BATCH_NORM_MOMENTUM = 0.99
BATCH_NORM_EPSILON = 1e-3


@dataclass
class BatchNormParams:
    """
    Per-channel scale/shift and running statistics of a batch normalization layer.
    Running statistics are updated in place in train mode.
    """

    gamma: Tensor
    beta: Tensor
    running_mean: Tensor
    running_var: Tensor
    momentum: float = BATCH_NORM_MOMENTUM
    eps: float = BATCH_NORM_EPSILON

    @classmethod
    def create(cls, channels: int, dtype=numpy.float32) -> "BatchNormParams":
        """
        Unit scale, zero shift, zero running mean and unit running variance.
        """
        return cls(
            gamma=numpy.ones(channels, dtype=dtype),
            beta=numpy.zeros(channels, dtype=dtype),
            running_mean=numpy.zeros(channels, dtype=dtype),
            running_var=numpy.ones(channels, dtype=dtype),
        )


@dataclass
class BatchNormCache:
    """
    Values kept from a train-mode forward pass.
    """

    x_hat: Tensor
    inv_std: Tensor
    gamma: Tensor
    axes: Tuple[int, ...]
    mode: Mode


def _channel_axes(x: Tensor, channels: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if x.ndim not in (2, 4):
        raise ShapeMismatchError("batch_norm", "ndim", "2 or 4", x.ndim)
    if x.shape[1] != channels:
        raise ShapeMismatchError("batch_norm", "C (channels)", channels, x.shape[1])

    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    shape = (1, channels) if x.ndim == 2 else (1, channels, 1, 1)
    return axes, shape


def batch_norm_forward(x: Tensor, params: BatchNormParams, mode: Mode) -> Tuple[Tensor, BatchNormCache]:
    """
      Normalizes each channel of an (N, C) or (N, C, H, W) input.

      Train mode uses batch statistics and moves the running statistics towards them with
      `params.momentum`; infer mode uses the running statistics.

    :param x: Input tensor.
    :param params: Layer parameters and running statistics.
    :param mode: train or infer.
    :return: Output tensor and the cache for batch_norm_backward.
    """
    axes, shape = _channel_axes(x, params.gamma.shape[0])
    if mode == Mode.TRAIN:
        mean = x.mean(axis=axes, dtype=numpy.float64)
        var = x.var(axis=axes, dtype=numpy.float64)
        params.running_mean[...] = params.momentum * params.running_mean + (1 - params.momentum) * mean
        params.running_var[...] = params.momentum * params.running_var + (1 - params.momentum) * var
    else:
        mean = params.running_mean.astype(numpy.float64)
        var = params.running_var.astype(numpy.float64)

    inv_std = 1.0 / numpy.sqrt(var + params.eps)
    x_hat = (x - mean.reshape(shape)) * inv_std.reshape(shape)
    out = x_hat * params.gamma.reshape(shape) + params.beta.reshape(shape)

    return out.astype(x.dtype), BatchNormCache(
        x_hat=x_hat, inv_std=inv_std.reshape(shape), gamma=params.gamma.reshape(shape), axes=axes, mode=mode
    )


def batch_norm_backward(dout: Tensor, cache: BatchNormCache) -> Tuple[Tensor, Tensor, Tensor]:
    """
      Gradients of batch normalization.

    :return: (dx, dgamma, dbeta)
    """
    dbeta = dout.sum(axis=cache.axes)
    dgamma = (dout * cache.x_hat).sum(axis=cache.axes)
    dx_hat = dout * cache.gamma

    if cache.mode == Mode.INFER:
        return (dx_hat * cache.inv_std).astype(dout.dtype), dgamma.astype(dout.dtype), dbeta

    count = dout.size // dout.shape[1]
    dx = (
        cache.inv_std
        / count
        * (
            count * dx_hat
            - dx_hat.sum(axis=cache.axes, keepdims=True)
            - cache.x_hat * (dx_hat * cache.x_hat).sum(axis=cache.axes, keepdims=True)
        )
    )
    return dx.astype(dout.dtype), dgamma.astype(dout.dtype), dbeta


def batch_norm(x: Tensor, params: BatchNormParams, mode: Mode) -> Tensor:
    """
      Forward-only batch normalization.
    """
    return batch_norm_forward(x, params, mode)[0]


def dropout_forward(
    x: Tensor, rate: float, mode: Mode, rng_seed: Optional[int] = None
) -> Tuple[Tensor, Optional[Tensor]]:
    """
      Inverted dropout: in train mode kept units are scaled by 1 / (1 - rate), so inference is identity.

    :param x: Input tensor.
    :param rate: Drop probability in [0, 1).
    :param mode: train or infer.
    :param rng_seed: Seed of the drop mask.
    :return: Output and the scaled keep mask (None when no mask was applied).
    """
    if not 0 <= rate < 1:
        raise KernelArgumentError(f"Dropout rate must be in [0, 1), got {rate}")
    if mode == Mode.INFER or rate == 0:
        return x, None

    keep = numpy.random.default_rng(rng_seed).random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1 - rate)
    return x * mask, mask


def dropout_backward(dout: Tensor, mask: Optional[Tensor]) -> Tensor:
    """
      Applies the forward keep mask to the upstream gradient.
    """
    return dout if mask is None else dout * mask


def dropout(x: Tensor, rate: float, mode: Mode, rng_seed: Optional[int] = None) -> Tensor:
    """
      Forward-only dropout.
    """
    return dropout_forward(x, rate, mode, rng_seed)[0]
