"""
 Activation kernels.
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

import numpy

from hepaclass.tensor._tensor import Tensor, require_ndim


def relu(x: Tensor) -> Tensor:
    """
      Rectified linear unit, max(x, 0).
    """
    return numpy.maximum(x, 0).astype(x.dtype, copy=False)


def relu_backward(dout: Tensor, x: Tensor) -> Tensor:
    """
      Passes the gradient where the forward input was positive.
    """
    return dout * (x > 0)


def softmax(logits: Tensor) -> Tensor:
    """
      Row-wise softmax of (N, K) logits, stabilised by subtracting the row maximum.
    """
    require_ndim("softmax", logits, 2)
    shifted = logits.astype(numpy.float64) - logits.max(axis=1, keepdims=True)
    exp = numpy.exp(shifted)
    return (exp / exp.sum(axis=1, keepdims=True)).astype(logits.dtype)


def log_softmax(logits: Tensor) -> Tensor:
    """
      Row-wise log of softmax, computed in float64.
    """
    require_ndim("log_softmax", logits, 2)
    shifted = logits.astype(numpy.float64) - logits.max(axis=1, keepdims=True)
    return shifted - numpy.log(numpy.exp(shifted).sum(axis=1, keepdims=True))
