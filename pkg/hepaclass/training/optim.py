"""
 Adam optimizer.
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

from typing import Dict

import numpy

from hepaclass.exceptions import ShapeMismatchError, NonFiniteError
from hepaclass.training._models import AdamState


def adam_step(params: Dict[str, numpy.ndarray], grads: Dict[str, numpy.ndarray], state: AdamState, lr: float) -> None:
    """
      One bias-corrected Adam update of `params` in place. Parameters without a gradient keep their value
      and moments. The timestep advances once per call.

    :param params: Parameter arrays by name, updated in place.
    :param grads: Gradients by name.
    :param state: Moment buffers and timestep, updated in place.
    :param lr: Learning rate of this step.
    :raises NonFiniteError: naming the first parameter with a NaN or Inf gradient; nothing is updated then.
    """
    for name, grad in grads.items():
        if grad is None:
            continue
        if grad.shape != params[name].shape:
            raise ShapeMismatchError("adam_step", name, params[name].shape, grad.shape)
        if not numpy.all(numpy.isfinite(grad)):
            raise NonFiniteError(name, "gradient")

    state.timestep += 1
    first_correction = 1 - state.beta1**state.timestep
    second_correction = 1 - state.beta2**state.timestep

    for name, value in params.items():
        grad = grads.get(name)
        if grad is None:
            continue

        first = state.first_moments.setdefault(name, numpy.zeros_like(value))
        second = state.second_moments.setdefault(name, numpy.zeros_like(value))
        first *= state.beta1
        first += (1 - state.beta1) * grad
        second *= state.beta2
        second += (1 - state.beta2) * grad * grad

        value -= (lr * (first / first_correction) / (numpy.sqrt(second / second_correction) + state.eps)).astype(
            value.dtype
        )
