"""
 2-D convolution (cross-correlation) with paired backward pass.
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
from typing import Tuple

import numpy
from numpy.lib.stride_tricks import sliding_window_view

from hepaclass.exceptions import ShapeMismatchError
from hepaclass.tensor._models import ConvSpec, resolve_padding, window_output_hw, ExplicitPadding
from hepaclass.tensor._tensor import Tensor, require_ndim


@dataclass
class Conv2dCache:
    """
    Values kept from the forward pass for conv2d_backward.
    """

    input_shape: Tuple[int, ...]
    windows: Tensor
    weights: Tensor
    stride: int
    padding: ExplicitPadding


def _validate(x: Tensor, weights: Tensor, bias: Tensor, spec: ConvSpec) -> None:
    require_ndim("conv2d", x, 4)
    require_ndim("conv2d", weights, 4)
    if x.shape[1] != spec.in_channels:
        raise ShapeMismatchError("conv2d", "C (input channels)", spec.in_channels, x.shape[1])
    if weights.shape != spec.weight_shape:
        raise ShapeMismatchError("conv2d", "weights (F, C, kh, kw)", spec.weight_shape, weights.shape)
    if bias.shape != (spec.out_channels,):
        raise ShapeMismatchError("conv2d", "bias (F,)", (spec.out_channels,), bias.shape)


def conv2d_forward(x: Tensor, weights: Tensor, bias: Tensor, spec: ConvSpec) -> Tuple[Tensor, Conv2dCache]:
    """
      Cross-correlates a batch of images with a filter bank and adds a per-filter bias.

    :param x: Input of shape (N, C, H, W).
    :param weights: Filters of shape (F, C, kh, kw).
    :param bias: Bias of shape (F,).
    :param spec: Convolution geometry.
    :return: Output of shape (N, F, H', W') and the cache for conv2d_backward.
    """
    _validate(x, weights, bias, spec)
    _, _, height, width = x.shape
    padding = resolve_padding(height, width, spec.kernel_h, spec.kernel_w, spec.stride, spec.padding)
    window_output_hw("conv2d", height, width, spec.kernel_h, spec.kernel_w, spec.stride, padding)

    top, bottom, left, right = padding
    padded = numpy.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right))) if any(padding) else x
    # (N, C, H', W', kh, kw) view, no copy
    windows = sliding_window_view(padded, (spec.kernel_h, spec.kernel_w), axis=(2, 3))[
        :, :, :: spec.stride, :: spec.stride
    ]
    out = numpy.tensordot(windows, weights, axes=((1, 4, 5), (1, 2, 3))).transpose(0, 3, 1, 2)
    out = numpy.ascontiguousarray(out + bias[None, :, None, None], dtype=x.dtype)

    return out, Conv2dCache(
        input_shape=x.shape, windows=windows, weights=weights, stride=spec.stride, padding=padding
    )


def conv2d_backward(dout: Tensor, cache: Conv2dCache) -> Tuple[Tensor, Tensor, Tensor]:
    """
      Gradients of conv2d with respect to input, weights and bias.

    :param dout: Upstream gradient of shape (N, F, H', W').
    :param cache: Cache produced by conv2d_forward.
    :return: (dx, dweights, dbias)
    """
    n, channels, height, width = cache.input_shape
    _, _, kernel_h, kernel_w = cache.weights.shape
    top, bottom, left, right = cache.padding
    out_h, out_w = dout.shape[2:]
    stride = cache.stride

    dweights = numpy.tensordot(dout, cache.windows, axes=((0, 2, 3), (0, 2, 3))).astype(dout.dtype)
    dbias = dout.sum(axis=(0, 2, 3))

    dpadded = numpy.zeros((n, channels, height + top + bottom, width + left + right), dtype=dout.dtype)
    for i in range(kernel_h):
        for j in range(kernel_w):
            # (N, H', W', C) contribution of kernel tap (i, j)
            contribution = numpy.tensordot(dout, cache.weights[:, :, i, j], axes=((1,), (0,)))
            dpadded[
                :, :, i : i + stride * (out_h - 1) + 1 : stride, j : j + stride * (out_w - 1) + 1 : stride
            ] += contribution.transpose(0, 3, 1, 2)

    dx = dpadded[:, :, top : top + height, left : left + width]
    return numpy.ascontiguousarray(dx), dweights, dbias


def conv2d(x: Tensor, weights: Tensor, bias: Tensor, spec: ConvSpec) -> Tensor:
    """
      Forward-only convolution.
    """
    out, _ = conv2d_forward(x, weights, bias, spec)
    return out
