"""
 Dense tensor helpers. Tensors are C-ordered floating point numpy arrays, NCHW for image batches.
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

from typing import Optional

import numpy

from hepaclass.exceptions import ShapeMismatchError, NonFiniteError

Tensor = numpy.ndarray

DEFAULT_DTYPE = numpy.float32


def as_tensor(value, dtype: Optional[numpy.dtype] = None) -> Tensor:
    """
      Converts a value to a C-ordered floating point array. Floating inputs keep their precision unless
      `dtype` is given, everything else becomes float32.

    :param value: Array-like value.
    :param dtype: Optional target dtype.
    :return: numpy array
    """
    array = numpy.asarray(value)
    if dtype is None:
        dtype = array.dtype if numpy.issubdtype(array.dtype, numpy.floating) else DEFAULT_DTYPE

    return numpy.ascontiguousarray(array, dtype=dtype)


def require_ndim(operation: str, value: Tensor, ndim: int) -> None:
    """
    Raises ShapeMismatchError unless `value` has exactly `ndim` dimensions.
    """
    if value.ndim != ndim:
        raise ShapeMismatchError(operation, "ndim", ndim, value.ndim)


def ensure_finite(name: str, value: Tensor) -> Tensor:
    """
    Raises NonFiniteError naming `name` if `value` has NaN or Inf entries.
    """
    if not numpy.all(numpy.isfinite(value)):
        raise NonFiniteError(name, f"{int(numpy.sum(~numpy.isfinite(value)))} of {value.size} entries")

    return value
