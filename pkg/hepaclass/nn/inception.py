"""
 Inception-style building blocks and the compact backbone.
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
from typing import Dict, Tuple, Optional

from hepaclass.exceptions import ConfigError, ShapeMismatchError, KernelArgumentError
from hepaclass.nn._base import Layer, Sequential, Parallel
from hepaclass.nn.layers import ConvBNReLU, Conv2D, Pool2D, GlobalAvgPool, Dense
from hepaclass.tensor import (
    Tensor,
    ConvSpec,
    Padding,
    PoolKind,
    BATCH_NORM_MOMENTUM,
    BATCH_NORM_EPSILON,
    add_residual,
    add_residual_backward,
)

# floor(H / 2) for stride-2 3x3 windows
REDUCTION_PADDING = (0, 1, 0, 1)

RESIDUAL_SCALE = 0.2

BACKBONE_STAGES = [
    "stem",
    "mixed_a1",
    "mixed_a2",
    "reduction_1",
    "mixed_b1",
    "mixed_b2",
    "reduction_2",
    "mixed_c1",
    "final_conv",
]


@dataclass
class BlockConfig:
    """
    Settings shared by all blocks of a backbone.
    """

    use_residual: bool = False
    residual_scale: float = RESIDUAL_SCALE
    width_multiplier: float = 1.0
    factorized_n: int = 5
    bn_momentum: float = BATCH_NORM_MOMENTUM
    bn_eps: float = BATCH_NORM_EPSILON

    def __post_init__(self):
        if self.width_multiplier <= 0:
            raise ConfigError(f"width_multiplier must be positive, got {self.width_multiplier}")
        if self.factorized_n < 3 or self.factorized_n % 2 == 0:
            raise ConfigError(f"factorized_n must be an odd integer >= 3, got {self.factorized_n}")

    def width(self, channels: int) -> int:
        """
        Scales a base channel count by the width multiplier.
        """
        return max(1, int(round(channels * self.width_multiplier)))

    def conv(self, in_channels: int, out_channels: int, kernel=1, stride: int = 1, padding=Padding.SAME) -> ConvBNReLU:
        """
        ConvBNReLU with this config's batch norm settings.
        """
        return ConvBNReLU(
            in_channels, out_channels, kernel, stride, padding, momentum=self.bn_momentum, eps=self.bn_eps
        )


class InceptionModuleA(Parallel):
    """
    Branches: 1x1 | 1x1 -> 3x3 | 1x1 -> 3x3 -> 3x3 | avg pool -> 1x1. Spatial dims are preserved.
    """

    def __init__(
        self,
        in_channels: int,
        branch_1x1: int,
        branch_3x3: Tuple[int, int],
        branch_double_3x3: Tuple[int, int, int],
        pool_projection: int,
        cfg: Optional[BlockConfig] = None,
    ):
        cfg = cfg or BlockConfig()
        super().__init__(
            {
                "branch_1x1": cfg.conv(in_channels, branch_1x1),
                "branch_3x3": Sequential(
                    [cfg.conv(in_channels, branch_3x3[0]), cfg.conv(branch_3x3[0], branch_3x3[1], 3)]
                ),
                "branch_double_3x3": Sequential(
                    [
                        cfg.conv(in_channels, branch_double_3x3[0]),
                        cfg.conv(branch_double_3x3[0], branch_double_3x3[1], 3),
                        cfg.conv(branch_double_3x3[1], branch_double_3x3[2], 3),
                    ]
                ),
                "branch_pool": Sequential(
                    [Pool2D(PoolKind.AVG, 3, 1, Padding.SAME), cfg.conv(in_channels, pool_projection)]
                ),
            }
        )
        self.out_channels = branch_1x1 + branch_3x3[1] + branch_double_3x3[2] + pool_projection


class FactorizedConv(Sequential):
    """
    An n x n receptive field as an n x 1 convolution followed by a 1 x n convolution,
    2 * n * C_in * C_out weights instead of n^2 * C_in * C_out.
    """

    def __init__(self, in_channels: int, out_channels: int, n: int, cfg: Optional[BlockConfig] = None):
        if n < 3 or n % 2 == 0:
            raise KernelArgumentError(f"Factorized convolution size must be odd and >= 3, got {n}")

        cfg = cfg or BlockConfig()
        super().__init__(
            {
                f"conv_{n}x1": cfg.conv(in_channels, out_channels, (n, 1)),
                f"conv_1x{n}": cfg.conv(out_channels, out_channels, (1, n)),
            }
        )
        self.n = n
        self.out_channels = out_channels


class FactorizedModule(Parallel):
    """
    Module A with the n x n convolutions factorized into n x 1 and 1 x n.
    """

    def __init__(
        self,
        in_channels: int,
        branch_1x1: int,
        branch_nxn: Tuple[int, int],
        branch_double_nxn: Tuple[int, int, int],
        pool_projection: int,
        cfg: Optional[BlockConfig] = None,
    ):
        cfg = cfg or BlockConfig()
        n = cfg.factorized_n
        super().__init__(
            {
                "branch_1x1": cfg.conv(in_channels, branch_1x1),
                "branch_nxn": Sequential(
                    [cfg.conv(in_channels, branch_nxn[0]), FactorizedConv(branch_nxn[0], branch_nxn[1], n, cfg)]
                ),
                "branch_double_nxn": Sequential(
                    [
                        cfg.conv(in_channels, branch_double_nxn[0]),
                        FactorizedConv(branch_double_nxn[0], branch_double_nxn[1], n, cfg),
                        FactorizedConv(branch_double_nxn[1], branch_double_nxn[2], n, cfg),
                    ]
                ),
                "branch_pool": Sequential(
                    [Pool2D(PoolKind.AVG, 3, 1, Padding.SAME), cfg.conv(in_channels, pool_projection)]
                ),
            }
        )
        self.out_channels = branch_1x1 + branch_nxn[1] + branch_double_nxn[2] + pool_projection


def split_1x3_3x1(in_channels: int, out_channels: int, cfg: Optional[BlockConfig] = None) -> Parallel:
    """
    The same activation fed to a 1x3 and a 3x1 convolution, outputs concatenated.
    """
    cfg = cfg or BlockConfig()
    return Parallel(
        {
            "conv_1x3": cfg.conv(in_channels, out_channels, (1, 3)),
            "conv_3x1": cfg.conv(in_channels, out_channels, (3, 1)),
        }
    )


class ExpandedFilterBank(Parallel):
    """
    Module with the 3x3 outputs expanded into parallel 1x3 and 3x1 convolutions (wider, not deeper).
    """

    def __init__(
        self,
        in_channels: int,
        branch_1x1: int,
        branch_3x3: Tuple[int, int],
        branch_double_3x3: Tuple[int, int, int],
        pool_projection: int,
        cfg: Optional[BlockConfig] = None,
    ):
        cfg = cfg or BlockConfig()
        super().__init__(
            {
                "branch_1x1": cfg.conv(in_channels, branch_1x1),
                "branch_3x3": Sequential(
                    {
                        "reduce": cfg.conv(in_channels, branch_3x3[0]),
                        "split": split_1x3_3x1(branch_3x3[0], branch_3x3[1], cfg),
                    }
                ),
                "branch_double_3x3": Sequential(
                    {
                        "reduce": cfg.conv(in_channels, branch_double_3x3[0]),
                        "conv_3x3": cfg.conv(branch_double_3x3[0], branch_double_3x3[1], 3),
                        "split": split_1x3_3x1(branch_double_3x3[1], branch_double_3x3[2], cfg),
                    }
                ),
                "branch_pool": Sequential(
                    [Pool2D(PoolKind.AVG, 3, 1, Padding.SAME), cfg.conv(in_channels, pool_projection)]
                ),
            }
        )
        self.out_channels = branch_1x1 + 2 * branch_3x3[1] + 2 * branch_double_3x3[2] + pool_projection


class GridReduction(Parallel):
    """
    Stride-2 convolution, stride-2 double convolution and stride-2 max pool in parallel.
    Halves H and W (floor) and adds the convolution widths to the input channels.
    """

    def __init__(
        self,
        in_channels: int,
        branch_3x3: int,
        branch_double_3x3: Tuple[int, int, int],
        cfg: Optional[BlockConfig] = None,
    ):
        cfg = cfg or BlockConfig()
        super().__init__(
            {
                "branch_3x3": cfg.conv(in_channels, branch_3x3, 3, stride=2, padding=REDUCTION_PADDING),
                "branch_double_3x3": Sequential(
                    [
                        cfg.conv(in_channels, branch_double_3x3[0]),
                        cfg.conv(branch_double_3x3[0], branch_double_3x3[1], 3),
                        cfg.conv(branch_double_3x3[1], branch_double_3x3[2], 3, stride=2, padding=REDUCTION_PADDING),
                    ]
                ),
                "branch_pool": Pool2D(PoolKind.MAX, 3, 2, REDUCTION_PADDING),
            }
        )
        self.out_channels = branch_3x3 + branch_double_3x3[2] + in_channels

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        for axis, name in [(2, "H"), (3, "W")]:
            if x.ndim == 4 and x.shape[axis] < 3:
                raise ShapeMismatchError("grid_reduction", name, ">= 3", x.shape[axis])
        return super().forward(x, training)


class ResidualWrap(Layer):
    """
    shortcut(x) + scale * block(x). The shortcut is identity, or a 1x1 projection when the block
    changes the channel count.
    """

    def __init__(self, block: Layer, in_channels: int, out_channels: int, scale: float = RESIDUAL_SCALE):
        super().__init__()
        self.scale = scale
        self.block = self.add_child("block", block)
        self.projection = (
            self.add_child("projection", Conv2D(ConvSpec(1, 1, in_channels, out_channels)))
            if in_channels != out_channels
            else None
        )
        self.out_channels = out_channels

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        shortcut = self.projection.forward(x, training) if self.projection else x
        return add_residual(shortcut, self.block.forward(x, training), self.scale)

    def backward(self, dout: Tensor) -> Tensor:
        dshortcut, dblock = add_residual_backward(dout, self.scale)
        dx = self.block.backward(dblock)
        return dx + (self.projection.backward(dshortcut) if self.projection else dshortcut)


class AuxiliaryClassifier(Layer):
    """
    Global average pool -> 1x1 ConvBNReLU -> dense, giving class logits from an intermediate feature map.
    """

    def __init__(self, in_channels: int, hidden_channels: int, num_classes: int = 2, cfg: Optional[BlockConfig] = None):
        super().__init__()
        cfg = cfg or BlockConfig()
        self.pool = self.add_child("pool", GlobalAvgPool())
        self.conv = self.add_child("conv", cfg.conv(in_channels, hidden_channels))
        self.fc = self.add_child("fc", Dense(hidden_channels, num_classes))

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        pooled = self.pool.forward(x, training)[:, :, None, None]
        hidden = self.conv.forward(pooled, training)
        return self.fc.forward(hidden.reshape(hidden.shape[0], -1), training)

    def backward(self, dout: Tensor) -> Tensor:
        dhidden = self.fc.backward(dout)
        dpooled = self.conv.backward(dhidden.reshape(*dhidden.shape, 1, 1))
        return self.pool.backward(dpooled.reshape(dpooled.shape[0], -1))


def _maybe_residual(block: Layer, in_channels: int, cfg: BlockConfig) -> Layer:
    if not cfg.use_residual:
        return block
    return ResidualWrap(block, in_channels, block.out_channels, cfg.residual_scale)


def build_backbone(cfg: BlockConfig, feature_width: int, in_channels: int = 3) -> Tuple[Sequential, Dict[str, int]]:
    """
      Compact backbone: stem (two stride-2 3x3 convolutions) -> 2x module A -> grid reduction
      -> 2x factorized module -> grid reduction -> expanded filter bank -> 1x1 convolution to `feature_width`.

    :param cfg: Block settings.
    :param feature_width: Output channels of the final 1x1 convolution.
    :param in_channels: Input channels (3 for stacked patch triplets).
    :return: The backbone and the output channel count of every stage.
    """
    w = cfg.width
    stages: Dict[str, Layer] = {}
    channels: Dict[str, int] = {}

    stages["stem"] = Sequential([cfg.conv(in_channels, w(16), 3, stride=2), cfg.conv(w(16), w(32), 3, stride=2)])
    channels["stem"] = w(32)

    current = w(32)
    for name in ["mixed_a1", "mixed_a2"]:
        block = InceptionModuleA(current, w(16), (w(16), w(24)), (w(16), w(24), w(24)), w(8), cfg)
        stages[name] = _maybe_residual(block, current, cfg)
        current = channels[name] = block.out_channels

    block = GridReduction(current, w(48), (w(16), w(24), w(24)), cfg)
    stages["reduction_1"] = block
    current = channels["reduction_1"] = block.out_channels

    for name in ["mixed_b1", "mixed_b2"]:
        block = FactorizedModule(current, w(32), (w(24), w(32)), (w(24), w(24), w(32)), w(32), cfg)
        stages[name] = _maybe_residual(block, current, cfg)
        current = channels[name] = block.out_channels

    block = GridReduction(current, w(48), (w(24), w(32), w(32)), cfg)
    stages["reduction_2"] = block
    current = channels["reduction_2"] = block.out_channels

    block = ExpandedFilterBank(current, w(32), (w(32), w(32)), (w(32), w(32), w(32)), w(32), cfg)
    stages["mixed_c1"] = _maybe_residual(block, current, cfg)
    current = channels["mixed_c1"] = block.out_channels

    stages["final_conv"] = cfg.conv(current, feature_width)
    channels["final_conv"] = feature_width

    assert list(stages) == BACKBONE_STAGES
    return Sequential(stages), channels
