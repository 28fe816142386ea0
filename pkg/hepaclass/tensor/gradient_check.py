"""
 Central finite-difference gradient checks.
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

from typing import Callable

import numpy

from hepaclass.tensor._tensor import Tensor

FINITE_DIFFERENCE_STEP = 1e-3


def numerical_gradient(func: Callable[[], float], value: Tensor, h: float = FINITE_DIFFERENCE_STEP) -> Tensor:
    """
      Central differences of a scalar function with respect to every entry of `value`.
      `value` is perturbed in place and restored.

    :param func: Zero-argument function evaluated on the current contents of `value`.
    :param value: float64 array read by `func`.
    :param h: Step size.
    :return: Gradient with the shape of `value`.
    """
    grad = numpy.zeros_like(value, dtype=numpy.float64)
    iterator = numpy.nditer(value, flags=["multi_index"], op_flags=["readwrite"])
    while not iterator.finished:
        index = iterator.multi_index
        original = value[index]
        value[index] = original + h
        plus = func()
        value[index] = original - h
        minus = func()
        value[index] = original
        grad[index] = (plus - minus) / (2 * h)
        iterator.iternext()

    return grad


def numerical_gradient_array(
    func: Callable[[], Tensor], value: Tensor, dout: Tensor, h: float = FINITE_DIFFERENCE_STEP
) -> Tensor:
    """
      Central differences of sum(func() * dout) with respect to `value`, for array-valued functions.
    """
    return numerical_gradient(lambda: float(numpy.sum(func().astype(numpy.float64) * dout)), value, h)


def relative_error(analytic: Tensor, numeric: Tensor) -> float:
    """
      ||a - b|| / max(||a|| + ||b||, 1e-12)
    """
    analytic = numpy.asarray(analytic, dtype=numpy.float64)
    numeric = numpy.asarray(numeric, dtype=numpy.float64)
    return float(
        numpy.linalg.norm(analytic - numeric) / max(numpy.linalg.norm(analytic) + numpy.linalg.norm(numeric), 1e-12)
    )
