"""
 Models shared by tensor kernels.
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

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

from hepaclass.exceptions import ShapeMismatchError, KernelArgumentError


class Padding(Enum):
    """
    Spatial padding modes.
    VALID: no padding. SAME: output size is ceil(input / stride), padding split evenly, extra on the bottom/right.
    """

    VALID = "valid"
    SAME = "same"


class Mode(Enum):
    """
    Execution mode of kernels with train/inference behaviour.
    """

    TRAIN = "train"
    INFER = "infer"


class PoolKind(Enum):
    """
    Pooling reductions.
    """

    MAX = "max"
    AVG = "avg"


# explicit (top, bottom, left, right) padding
ExplicitPadding = Tuple[int, int, int, int]


@dataclass(frozen=True)
class ConvSpec:
    """
    Geometry of a 2-D convolution.
    """

    kernel_h: int
    kernel_w: int
    in_channels: int
    out_channels: int
    stride: int = 1
    padding: Union[Padding, ExplicitPadding] = Padding.SAME

    def __post_init__(self):
        for name in ["kernel_h", "kernel_w", "in_channels", "out_channels", "stride"]:
            if getattr(self, name) < 1:
                raise KernelArgumentError(f"ConvSpec.{name} must be a positive integer, got {getattr(self, name)}")

    @property
    def weight_shape(self) -> Tuple[int, int, int, int]:
        """Shape of the weight tensor: (F, C, kh, kw)"""
        return self.out_channels, self.in_channels, self.kernel_h, self.kernel_w

    def output_hw(self, height: int, width: int) -> Tuple[int, int]:
        """
          Output spatial dims for an input of (height, width).

        :raises ShapeMismatchError: if the output would be empty.
        """
        padding = resolve_padding(height, width, self.kernel_h, self.kernel_w, self.stride, self.padding)
        return window_output_hw("conv2d", height, width, self.kernel_h, self.kernel_w, self.stride, padding)


def resolve_padding(
    height: int, width: int, kernel_h: int, kernel_w: int, stride: int, padding: Union[Padding, ExplicitPadding]
) -> ExplicitPadding:
    """
      Converts a padding mode to explicit (top, bottom, left, right) amounts.
    """
    if isinstance(padding, Padding):
        if padding == Padding.VALID:
            return 0, 0, 0, 0

        def _same(size: int, kernel: int) -> Tuple[int, int]:
            total = max((math.ceil(size / stride) - 1) * stride + kernel - size, 0)
            return total // 2, total - total // 2

        top, bottom = _same(height, kernel_h)
        left, right = _same(width, kernel_w)
        return top, bottom, left, right

    if len(padding) != 4 or any(amount < 0 for amount in padding):
        raise KernelArgumentError(f"Explicit padding must be four non-negative integers, got {padding}")

    return tuple(padding)


def window_output_hw(
    operation: str, height: int, width: int, kernel_h: int, kernel_w: int, stride: int, padding: ExplicitPadding
) -> Tuple[int, int]:
    """
      Standard sliding window output size.
    """
    top, bottom, left, right = padding
    out_h = (height + top + bottom - kernel_h) // stride + 1
    out_w = (width + left + right - kernel_w) // stride + 1
    if height + top + bottom < kernel_h or out_h < 1:
        raise ShapeMismatchError(operation, "H", f">= {kernel_h - top - bottom}", height)
    if width + left + right < kernel_w or out_w < 1:
        raise ShapeMismatchError(operation, "W", f">= {kernel_w - left - right}", width)

    return out_h, out_w
