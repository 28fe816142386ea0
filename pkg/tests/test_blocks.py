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

from contextlib import nullcontext as does_not_raise
from typing import Dict

import numpy
import pytest

from hepaclass.exceptions import KernelArgumentError, ShapeMismatchError, ConfigError
from hepaclass.nn import (
    Layer,
    BlockConfig,
    ConvBNReLU,
    InceptionModuleA,
    FactorizedConv,
    FactorizedModule,
    ExpandedFilterBank,
    GridReduction,
    ResidualWrap,
    AuxiliaryClassifier,
    split_1x3_3x1,
    build_backbone,
    BACKBONE_STAGES,
    initialize,
)
from hepaclass.tensor.gradient_check import numerical_gradient_array, relative_error

GRADIENT_TOLERANCE = 1e-3

# small steps keep finite differences away from ReLU and max-pool kinks
FINITE_DIFFERENCE_STEP = 1e-5


def _prepared_block(block: Layer, seed: int = 0) -> Layer:
    block.astype(numpy.float64)
    initialize(block, seed)
    return block


def _backward(block: Layer, x: numpy.ndarray, seed: int = 1):
    out = block.forward(x, training=True)
    dout = numpy.random.default_rng(seed).standard_normal(out.shape)
    block.zero_grad()
    dx = block.backward(dout)
    return out, dout, dx


def _check_input_gradient(block: Layer, x: numpy.ndarray) -> float:
    _, dout, dx = _backward(block, x)
    numeric = numerical_gradient_array(
        lambda: block.forward(x, training=True), x, dout, h=FINITE_DIFFERENCE_STEP
    )
    return relative_error(dx, numeric)


def _branch_gradients(block: Layer) -> Dict[str, float]:
    return {
        name: max(float(numpy.abs(parameter.grad).max()) for _, parameter in branch.named_parameters())
        for name, branch in block.children.items()
        if list(branch.named_parameters())
    }


def test_block_config_width():
    assert BlockConfig(width_multiplier=0.5).width(16) == 8
    assert BlockConfig(width_multiplier=0.01).width(16) == 1


@pytest.mark.parametrize(
    "width_multiplier,factorized_n,expectation",
    [
        (1.0, 5, does_not_raise()),
        (0.25, 3, does_not_raise()),
        (0.0, 5, pytest.raises(ConfigError)),
        (1.0, 4, pytest.raises(ConfigError)),
    ],
)
def test_block_config_validation(width_multiplier: float, factorized_n: int, expectation):
    with expectation:
        BlockConfig(width_multiplier=width_multiplier, factorized_n=factorized_n)


def test_inception_module_a_shape():
    block = _prepared_block(InceptionModuleA(3, 2, (2, 3), (2, 3, 4), 2))
    out = block.forward(numpy.random.default_rng(0).standard_normal((2, 3, 6, 5)))

    assert block.out_channels == 2 + 3 + 4 + 2
    assert out.shape == (2, 11, 6, 5)


def test_inception_module_a_gradients():
    block = _prepared_block(InceptionModuleA(3, 2, (2, 3), (2, 3, 3), 2))
    x = numpy.random.default_rng(2).standard_normal((2, 3, 5, 5))

    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE

    gradients = _branch_gradients(block)
    assert set(gradients) == {"branch_1x1", "branch_3x3", "branch_double_3x3", "branch_pool"}
    assert all(value > 0 for value in gradients.values())


@pytest.mark.parametrize("n", [3, 5, 7])
def test_factorized_conv_parameters(n: int):
    block = FactorizedConv(4, 4, n)
    conv_weights = sum(parameter.value.size for name, parameter in block.named_parameters() if name.endswith("weight"))

    assert conv_weights == 2 * n * 4 * 4
    assert conv_weights / (n * n * 4 * 4) == pytest.approx(2 / n)


@pytest.mark.parametrize(
    "n,expectation",
    [
        (3, does_not_raise()),
        (4, pytest.raises(KernelArgumentError)),
        (1, pytest.raises(KernelArgumentError)),
    ],
)
def test_factorized_conv_size(n: int, expectation):
    with expectation:
        block = _prepared_block(FactorizedConv(2, 3, n))
        full = _prepared_block(ConvBNReLU(2, 3, n))
        x = numpy.random.default_rng(0).standard_normal((1, 2, 7, 6))

        assert block.forward(x).shape == full.forward(x).shape == (1, 3, 7, 6)


def test_factorized_module_gradients():
    block = _prepared_block(FactorizedModule(3, 2, (2, 2), (2, 2, 3), 2, BlockConfig(factorized_n=3)))
    x = numpy.random.default_rng(4).standard_normal((2, 3, 5, 5))

    assert block.out_channels == 9
    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE


def test_split_branches_share_parent():
    split = _prepared_block(split_1x3_3x1(4, 3))
    out = split.forward(numpy.zeros((2, 4, 5, 5)), training=True)

    assert out.shape == (2, 6, 5, 5)
    assert numpy.all(out == 0)


def test_expanded_filter_bank():
    block = _prepared_block(ExpandedFilterBank(3, 2, (2, 2), (2, 2, 2), 2))
    x = numpy.random.default_rng(5).standard_normal((2, 3, 4, 4))

    assert block.out_channels == 2 + 2 * 2 + 2 * 2 + 2
    assert block.forward(x).shape == (2, 12, 4, 4)
    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE


@pytest.mark.parametrize(
    "size,expected,expectation",
    [
        (8, 4, does_not_raise()),
        (7, 3, does_not_raise()),
        (3, 1, does_not_raise()),
        (2, None, pytest.raises(ShapeMismatchError)),
    ],
)
def test_grid_reduction_size(size: int, expected, expectation):
    block = _prepared_block(GridReduction(3, 4, (2, 3, 3)))
    with expectation:
        out = block.forward(numpy.random.default_rng(0).standard_normal((1, 3, size, size)))

        assert out.shape == (1, block.out_channels, expected, expected)
        assert block.out_channels > 3


def test_grid_reduction_gradients():
    block = _prepared_block(GridReduction(2, 3, (2, 2, 2)))
    x = numpy.random.default_rng(6).standard_normal((2, 2, 7, 7))

    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE


def test_residual_wrap_identity():
    x = numpy.random.default_rng(0).standard_normal((2, 3, 4, 4))
    # zero weights make the block output zero
    zero_block = ResidualWrap(ConvBNReLU(3, 3, 3), 3, 3, scale=0.2)
    scaled_out = ResidualWrap(_prepared_block(ConvBNReLU(3, 3, 3)), 3, 3, scale=0.0)

    assert numpy.array_equal(zero_block.forward(x.astype(numpy.float32)), x.astype(numpy.float32))
    assert numpy.array_equal(scaled_out.forward(x), x)


def test_residual_wrap_projection_and_gradients():
    block = _prepared_block(ResidualWrap(ConvBNReLU(3, 5, 3), 3, 5, scale=0.2))
    x = numpy.random.default_rng(7).standard_normal((2, 3, 4, 4))

    assert block.projection is not None
    assert block.forward(x).shape == (2, 5, 4, 4)
    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE


def test_auxiliary_classifier():
    block = _prepared_block(AuxiliaryClassifier(6, 4))
    x = numpy.random.default_rng(8).standard_normal((3, 6, 5, 5))

    assert block.forward(x).shape == (3, 2)
    assert _check_input_gradient(block, x) < GRADIENT_TOLERANCE


@pytest.mark.parametrize("use_residual", [False, True])
def test_build_backbone(use_residual: bool):
    backbone, channels = build_backbone(BlockConfig(use_residual=use_residual, width_multiplier=0.25), 16)
    backbone = _prepared_block(backbone)
    out = backbone.forward(numpy.random.default_rng(0).standard_normal((2, 3, 32, 32)))

    assert list(backbone.children) == BACKBONE_STAGES
    assert list(channels) == BACKBONE_STAGES
    assert out.shape == (2, 16, 2, 2)
    assert isinstance(backbone.children["mixed_a1"], ResidualWrap) == use_residual


def test_blocks_finite_for_large_inputs():
    block = _prepared_block(InceptionModuleA(3, 2, (2, 3), (2, 3, 3), 2))
    x = numpy.random.default_rng(9).uniform(-1e3, 1e3, (2, 3, 5, 5))

    assert numpy.all(numpy.isfinite(block.forward(x, training=True)))
    assert numpy.all(numpy.isfinite(block.forward(x, training=False)))
