"""
 Spatial pooling kernels.
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
from typing import Tuple, Union, Optional

import numpy
from numpy.lib.stride_tricks import sliding_window_view

from hepaclass.exceptions import KernelArgumentError
from hepaclass.tensor._models import PoolKind, Padding, ExplicitPadding, resolve_padding, window_output_hw
from hepaclass.tensor._tensor import Tensor, require_ndim


@dataclass
class Pool2dCache:
    """
    Values kept from the forward pass for pool2d_backward.
    """

    input_shape: Tuple[int, ...]
    kind: PoolKind
    window: int
    stride: int
    padding: ExplicitPadding
    # max: flat argmax index inside each window; avg: number of real (non-padding) cells per window
    argmax: Optional[Tensor] = None
    counts: Optional[Tensor] = None


def _window_counts(height: int, width: int, window: int, stride: int, padding: ExplicitPadding) -> Tensor:
    top, bottom, left, right = padding
    ones = numpy.pad(numpy.ones((height, width)), ((top, bottom), (left, right)))
    return sliding_window_view(ones, (window, window))[::stride, ::stride].sum(axis=(-1, -2))


def pool2d_forward(
    x: Tensor,
    kind: PoolKind,
    window: int,
    stride: int,
    padding: Union[Padding, ExplicitPadding] = Padding.VALID,
) -> Tuple[Tensor, Pool2dCache]:
    """
      Max or average pooling over square windows. Padding cells never win a max and are not
      counted by an average.

    :param x: Input of shape (N, C, H, W).
    :param kind: max or avg.
    :param window: Window side length.
    :param stride: Window step.
    :param padding: Padding mode or explicit amounts.
    :return: Pooled output and the cache for pool2d_backward.
    """
    require_ndim("pool2d", x, 4)
    if window < 1 or stride < 1:
        raise KernelArgumentError(f"pool2d window and stride must be positive, got {window}, {stride}")

    _, _, height, width = x.shape
    explicit = resolve_padding(height, width, window, window, stride, padding)
    if window > height + explicit[0] + explicit[1] or window > width + explicit[2] + explicit[3]:
        raise KernelArgumentError(f"pool2d window {window} is larger than the input {height}x{width}")
    out_h, out_w = window_output_hw("pool2d", height, width, window, window, stride, explicit)

    top, bottom, left, right = explicit
    fill = -numpy.inf if kind == PoolKind.MAX else 0.0
    padded = (
        numpy.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right)), constant_values=fill) if any(explicit) else x
    )
    windows = sliding_window_view(padded, (window, window), axis=(2, 3))[:, :, ::stride, ::stride]
    cache = Pool2dCache(input_shape=x.shape, kind=kind, window=window, stride=stride, padding=explicit)

    if kind == PoolKind.MAX:
        flat = windows.reshape(*windows.shape[:4], window * window)
        cache.argmax = flat.argmax(axis=-1)
        out = numpy.take_along_axis(flat, cache.argmax[..., None], axis=-1)[..., 0]
    else:
        cache.counts = _window_counts(height, width, window, stride, explicit)
        out = windows.sum(axis=(-1, -2), dtype=numpy.float64) / cache.counts

    assert out.shape[2:] == (out_h, out_w)
    return numpy.ascontiguousarray(out, dtype=x.dtype), cache


def pool2d_backward(dout: Tensor, cache: Pool2dCache) -> Tensor:
    """
      Routes the gradient to the argmax cell (max) or spreads it uniformly over the real cells (avg).

    :param dout: Upstream gradient of the pooled output.
    :param cache: Cache produced by pool2d_forward.
    :return: Gradient with respect to the pooling input.
    """
    n, channels, height, width = cache.input_shape
    top, bottom, left, right = cache.padding
    out_h, out_w = dout.shape[2:]
    window, stride = cache.window, cache.stride
    dpadded = numpy.zeros((n, channels, height + top + bottom, width + left + right), dtype=dout.dtype)

    if cache.kind == PoolKind.MAX:
        n_idx, c_idx, oh_idx, ow_idx = numpy.indices(cache.argmax.shape, sparse=True)
        rows = oh_idx * stride + cache.argmax // window
        cols = ow_idx * stride + cache.argmax % window
        numpy.add.at(dpadded, (n_idx, c_idx, rows, cols), dout)
    else:
        spread = dout / cache.counts
        for i in range(window):
            for j in range(window):
                dpadded[
                    :, :, i : i + stride * (out_h - 1) + 1 : stride, j : j + stride * (out_w - 1) + 1 : stride
                ] += spread

    return numpy.ascontiguousarray(dpadded[:, :, top : top + height, left : left + width])


def pool2d(x: Tensor, kind: PoolKind, window: int, stride: int) -> Tensor:
    """
      Forward-only pooling with valid padding.
    """
    out, _ = pool2d_forward(x, kind, window, stride)
    return out


def global_avg_pool_forward(x: Tensor) -> Tuple[Tensor, Tuple[int, ...]]:
    """
      Per-channel spatial mean: (N, C, H, W) -> (N, C).
    """
    require_ndim("global_avg_pool", x, 4)
    return x.mean(axis=(2, 3), dtype=numpy.float64).astype(x.dtype), x.shape


def global_avg_pool_backward(dout: Tensor, input_shape: Tuple[int, ...]) -> Tensor:
    """
      Spreads (N, C) gradients evenly over each (H, W) map.
    """
    _, _, height, width = input_shape
    return numpy.ascontiguousarray(
        numpy.broadcast_to(dout[:, :, None, None] / (height * width), input_shape), dtype=dout.dtype
    )


def global_avg_pool(x: Tensor) -> Tensor:
    """
      Forward-only global average pooling.
    """
    return global_avg_pool_forward(x)[0]
