"""
 Channel concatenation, channel split and residual addition.
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

from typing import List, Sequence, Tuple

import numpy

from hepaclass.exceptions import ShapeMismatchError
from hepaclass.tensor._tensor import Tensor, require_ndim


def concat_channels(inputs: Sequence[Tensor]) -> Tensor:
    """
      Concatenates (N, C_i, H, W) tensors along the channel axis, in argument order.
    """
    if not inputs:
        raise ShapeMismatchError("concat_channels", "inputs", ">= 1 tensor", 0)

    first = inputs[0]
    for value in inputs:
        require_ndim("concat_channels", value, 4)
        for axis, name in [(0, "N"), (2, "H"), (3, "W")]:
            if value.shape[axis] != first.shape[axis]:
                raise ShapeMismatchError("concat_channels", name, first.shape[axis], value.shape[axis])

    return numpy.concatenate(inputs, axis=1)


def split_channels(dout: Tensor, channels: Sequence[int]) -> List[Tensor]:
    """
      Backward of concat_channels: splits a gradient into per-input channel groups.
    """
    if dout.shape[1] != sum(channels):
        raise ShapeMismatchError("concat_channels backward", "C", sum(channels), dout.shape[1])

    return numpy.split(dout, numpy.cumsum(channels)[:-1], axis=1)


def add_residual(x: Tensor, fx: Tensor, scale: float) -> Tensor:
    """
      x + scale * fx.
    """
    if x.shape != fx.shape:
        for axis, (expected, actual) in enumerate(zip(x.shape, fx.shape)):
            if expected != actual:
                raise ShapeMismatchError("add_residual", "NCHW"[axis] if x.ndim == 4 else str(axis), expected, actual)
        raise ShapeMismatchError("add_residual", "ndim", x.ndim, fx.ndim)

    return (x + x.dtype.type(scale) * fx).astype(x.dtype, copy=False)


def add_residual_backward(dout: Tensor, scale: float) -> Tuple[Tensor, Tensor]:
    """
      Gradients of add_residual: (dx, dfx) = (dout, scale * dout).
    """
    return dout, dout * dout.dtype.type(scale)
