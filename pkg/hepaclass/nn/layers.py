"""
 Basic layers over tensor kernels.
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

from typing import Optional, Union

import numpy

from hepaclass.nn._base import Layer, Parameter, Sequential
from hepaclass.tensor import (
    Tensor,
    ConvSpec,
    Mode,
    Padding,
    PoolKind,
    ExplicitPadding,
    BatchNormParams,
    BATCH_NORM_MOMENTUM,
    BATCH_NORM_EPSILON,
    conv2d_forward,
    conv2d_backward,
    batch_norm_forward,
    batch_norm_backward,
    relu,
    relu_backward,
    pool2d_forward,
    pool2d_backward,
    global_avg_pool_forward,
    global_avg_pool_backward,
    dense_forward,
    dense_backward,
    dropout_forward,
    dropout_backward,
)


def _mode(training: bool) -> Mode:
    return Mode.TRAIN if training else Mode.INFER


class Conv2D(Layer):
    """
    2-D convolution with an optional per-filter bias.
    """

    def __init__(self, spec: ConvSpec, use_bias: bool = True):
        super().__init__()
        self.spec = spec
        self.weight = self.add_parameter(
            "weight", Parameter.zeros(spec.weight_shape, fan_in=spec.in_channels * spec.kernel_h * spec.kernel_w)
        )
        self.bias = self.add_parameter("bias", Parameter.zeros((spec.out_channels,))) if use_bias else None
        self._cache = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        if self.bias is not None:
            bias = self.bias.value
        else:
            bias = numpy.zeros(self.spec.out_channels, dtype=self.weight.value.dtype)
        out, cache = conv2d_forward(x, self.weight.value, bias, self.spec)
        if training:
            self._cache = cache
        return out

    def backward(self, dout: Tensor) -> Tensor:
        dx, dweight, dbias = conv2d_backward(dout, self._cache)
        self.weight.accumulate(dweight)
        if self.bias is not None:
            self.bias.accumulate(dbias)
        return dx


class BatchNorm(Layer):
    """
    Per-channel batch normalization with running statistics buffers.
    """

    def __init__(self, channels: int, momentum: float = BATCH_NORM_MOMENTUM, eps: float = BATCH_NORM_EPSILON):
        super().__init__()
        self.momentum = momentum
        self.eps = eps
        self.gamma = self.add_parameter("gamma", Parameter.ones((channels,)))
        self.beta = self.add_parameter("beta", Parameter.zeros((channels,)))
        defaults = BatchNormParams.create(channels)
        self.add_buffer("running_mean", defaults.running_mean)
        self.add_buffer("running_var", defaults.running_var)
        self._cache = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        params = BatchNormParams(
            gamma=self.gamma.value,
            beta=self.beta.value,
            running_mean=self._buffers["running_mean"],
            running_var=self._buffers["running_var"],
            momentum=self.momentum,
            eps=self.eps,
        )
        out, cache = batch_norm_forward(x, params, _mode(training))
        if training:
            self._cache = cache
        return out

    def backward(self, dout: Tensor) -> Tensor:
        dx, dgamma, dbeta = batch_norm_backward(dout, self._cache)
        self.gamma.accumulate(dgamma)
        self.beta.accumulate(dbeta)
        return dx


class ReLU(Layer):
    """
    Rectified linear unit.
    """

    def __init__(self):
        super().__init__()
        self._input = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        if training:
            self._input = x
        return relu(x)

    def backward(self, dout: Tensor) -> Tensor:
        return relu_backward(dout, self._input)


class ConvBNReLU(Sequential):
    """
    Convolution without bias, then batch normalization, then ReLU.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel: Union[int, tuple] = 1,
        stride: int = 1,
        padding: Union[Padding, ExplicitPadding] = Padding.SAME,
        momentum: float = BATCH_NORM_MOMENTUM,
        eps: float = BATCH_NORM_EPSILON,
    ):
        kernel_h, kernel_w = (kernel, kernel) if isinstance(kernel, int) else kernel
        super().__init__(
            {
                "conv": Conv2D(
                    ConvSpec(kernel_h, kernel_w, in_channels, out_channels, stride=stride, padding=padding),
                    use_bias=False,
                ),
                "bn": BatchNorm(out_channels, momentum=momentum, eps=eps),
                "relu": ReLU(),
            }
        )
        self.out_channels = out_channels


class Pool2D(Layer):
    """
    Max or average pooling over square windows.
    """

    def __init__(
        self,
        kind: PoolKind,
        window: int,
        stride: int,
        padding: Union[Padding, ExplicitPadding] = Padding.VALID,
    ):
        super().__init__()
        self.kind = kind
        self.window = window
        self.stride = stride
        self.padding = padding
        self._cache = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        out, cache = pool2d_forward(x, self.kind, self.window, self.stride, self.padding)
        if training:
            self._cache = cache
        return out

    def backward(self, dout: Tensor) -> Tensor:
        return pool2d_backward(dout, self._cache)


class GlobalAvgPool(Layer):
    """
    (N, C, H, W) -> (N, C) spatial mean.
    """

    def __init__(self):
        super().__init__()
        self._input_shape = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        out, input_shape = global_avg_pool_forward(x)
        if training:
            self._input_shape = input_shape
        return out

    def backward(self, dout: Tensor) -> Tensor:
        return global_avg_pool_backward(dout, self._input_shape)


class Dense(Layer):
    """
    Fully connected layer, weights of shape (in_features, out_features).
    """

    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.weight = self.add_parameter("weight", Parameter.zeros((in_features, out_features), fan_in=in_features))
        self.bias = self.add_parameter("bias", Parameter.zeros((out_features,)))
        self._cache = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        out, cache = dense_forward(x, self.weight.value, self.bias.value)
        if training:
            self._cache = cache
        return out

    def backward(self, dout: Tensor) -> Tensor:
        dx, dweight, dbias = dense_backward(dout, self._cache)
        self.weight.accumulate(dweight)
        self.bias.accumulate(dbias)
        return dx


class Dropout(Layer):
    """
    Inverted dropout. Every training forward pass draws a fresh mask from the layer's seeded stream.
    """

    def __init__(self, rate: float, seed: Optional[int] = None):
        super().__init__()
        self.rate = rate
        self._rng = numpy.random.default_rng(seed)
        self._mask = None

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        if not training:
            return dropout_forward(x, self.rate, Mode.INFER)[0]

        out, self._mask = dropout_forward(x, self.rate, Mode.TRAIN, int(self._rng.integers(2**63)))
        return out

    def backward(self, dout: Tensor) -> Tensor:
        return dropout_backward(dout, self._mask)
