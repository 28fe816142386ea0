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
import pytest

from hepaclass.exceptions import NonFiniteError, ShapeMismatchError
from hepaclass.training import AdamState, adam_step


def _params():
    return {
        "weight": numpy.linspace(-1.0, 1.0, 6, dtype=numpy.float32).reshape((2, 3)),
        "bias": numpy.zeros((3,), dtype=numpy.float32),
    }


def test_zero_gradient_keeps_parameters():
    params = _params()
    expected = {name: value.copy() for name, value in params.items()}
    state = AdamState()

    for _ in range(3):
        adam_step(params, {name: numpy.zeros_like(value) for name, value in params.items()}, state, lr=1e-3)

    assert state.timestep == 3
    assert all(numpy.array_equal(params[name], expected[name]) for name in params)


@pytest.mark.parametrize("gradient", [0.5, -2.0, 1e-3])
def test_first_step_magnitude(gradient: float):
    params = _params()
    before = params["weight"].copy()
    state = AdamState()

    adam_step(params, {"weight": numpy.full((2, 3), gradient, dtype=numpy.float32)}, state, lr=1e-3)

    assert numpy.allclose(before - params["weight"], numpy.sign(gradient) * 1e-3, rtol=1e-3)
    assert numpy.array_equal(params["bias"], numpy.zeros(3))
    assert "bias" not in state.first_moments


def test_steps_deterministic():
    rng = numpy.random.default_rng(0)
    gradients = [{name: rng.standard_normal(value.shape) for name, value in _params().items()} for _ in range(5)]
    runs = []
    for _ in range(2):
        params, state = _params(), AdamState()
        for step_gradients in gradients:
            adam_step(params, step_gradients, state, lr=1e-2)
        runs.append(params)

    assert all(numpy.array_equal(runs[0][name], runs[1][name]) for name in runs[0])


@pytest.mark.parametrize("bad_value", [numpy.nan, numpy.inf, -numpy.inf])
def test_non_finite_gradient(bad_value: float):
    params = _params()
    expected = {name: value.copy() for name, value in params.items()}
    bias_gradient = numpy.zeros((3,), dtype=numpy.float32)
    bias_gradient[1] = bad_value
    state = AdamState()

    with pytest.raises(NonFiniteError) as error:
        adam_step(params, {"weight": numpy.ones((2, 3)), "bias": bias_gradient}, state, lr=1e-3)

    assert error.value.name == "bias"
    assert state.timestep == 0
    assert all(numpy.array_equal(params[name], expected[name]) for name in params)


def test_gradient_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        adam_step(_params(), {"weight": numpy.ones((3, 2))}, AdamState(), lr=1e-3)
