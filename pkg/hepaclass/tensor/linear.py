"""
 Fully connected layer kernel.
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

from hepaclass.exceptions import ShapeMismatchError
from hepaclass.tensor._tensor import Tensor, require_ndim


def dense_forward(x: Tensor, weights: Tensor, bias: Tensor) -> Tuple[Tensor, Tuple[Tensor, Tensor]]:
    """
      Affine map x @ W + b.

    :param x: Input of shape (N, D).
    :param weights: Weights of shape (D, M).
    :param bias: Bias of shape (M,).
    :return: Output of shape (N, M) and the cache for dense_backward.
    """
    require_ndim("dense", x, 2)
    require_ndim("dense", weights, 2)
    if x.shape[1] != weights.shape[0]:
        raise ShapeMismatchError("dense", "D (input features)", weights.shape[0], x.shape[1])
    if bias.shape != (weights.shape[1],):
        raise ShapeMismatchError("dense", "bias (M,)", (weights.shape[1],), bias.shape)

    return (x @ weights + bias).astype(x.dtype, copy=False), (x, weights)


def dense_backward(dout: Tensor, cache: Tuple[Tensor, Tensor]) -> Tuple[Tensor, Tensor, Tensor]:
    """
      Gradients of the affine map.

    :return: (dx, dweights, dbias)
    """
    x, weights = cache
    return dout @ weights.T, x.T @ dout, dout.sum(axis=0)


def dense(x: Tensor, weights: Tensor, bias: Tensor) -> Tensor:
    """
      Forward-only affine map.
    """
    return dense_forward(x, weights, bias)[0]
