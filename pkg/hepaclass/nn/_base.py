"""
 Layer base classes: parameters, containers and state traversal.
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

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Iterator, Tuple, Optional, List, Sequence, Union

import numpy

from hepaclass.exceptions import (
    ShapeMismatchError,
    CheckpointFormatError,
    CheckpointUnknownBlobError,
    CheckpointMissingBlobError,
)
from hepaclass.tensor import Tensor, DEFAULT_DTYPE, concat_channels, split_channels


@dataclass
class Parameter:
    """
    A trainable tensor and its accumulated gradient.
    `fan_in` is set for weights that take a fan-in scaled random initialization.
    """

    value: Tensor
    grad: Optional[Tensor] = None
    fan_in: Optional[int] = None

    @classmethod
    def zeros(cls, shape: Tuple[int, ...], fan_in: Optional[int] = None) -> "Parameter":
        """Zero-valued parameter"""
        return cls(value=numpy.zeros(shape, dtype=DEFAULT_DTYPE), fan_in=fan_in)

    @classmethod
    def ones(cls, shape: Tuple[int, ...]) -> "Parameter":
        """One-valued parameter"""
        return cls(value=numpy.ones(shape, dtype=DEFAULT_DTYPE))

    def accumulate(self, grad: Tensor) -> None:
        """
        Adds `grad` to the stored gradient.
        """
        self.grad = grad.astype(self.value.dtype, copy=True) if self.grad is None else self.grad + grad


class Layer(ABC):
    """
    Differentiable layer. `forward(x, training=True)` keeps what `backward` needs on the layer,
    `forward(x, training=False)` never mutates the layer.
    """

    def __init__(self):
        self._parameters: Dict[str, Parameter] = {}
        self._buffers: Dict[str, Tensor] = {}
        self._children: Dict[str, "Layer"] = {}

    def add_parameter(self, name: str, parameter: Parameter) -> Parameter:
        """Registers a trainable parameter"""
        self._parameters[name] = parameter
        return parameter

    def add_buffer(self, name: str, value: Tensor) -> Tensor:
        """Registers a non-trainable state tensor"""
        self._buffers[name] = value
        return value

    def add_child(self, name: str, layer: "Layer") -> "Layer":
        """Registers a sub-layer"""
        self._children[name] = layer
        return layer

    @property
    def children(self) -> Dict[str, "Layer"]:
        """Sub-layers in registration order"""
        return self._children

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Parameter]]:
        """
        Yields (dotted name, parameter) for this layer and all sub-layers, in registration order.
        """
        for name, parameter in self._parameters.items():
            yield f"{prefix}{name}", parameter
        for child_name, child in self._children.items():
            yield from child.named_parameters(f"{prefix}{child_name}.")

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        """
        Yields (dotted name, buffer) for this layer and all sub-layers, in registration order.
        """
        for name, value in self._buffers.items():
            yield f"{prefix}{name}", value
        for child_name, child in self._children.items():
            yield from child.named_buffers(f"{prefix}{child_name}.")

    def parameter_count(self) -> int:
        """Number of trainable scalars"""
        return sum(parameter.value.size for _, parameter in self.named_parameters())

    def zero_grad(self) -> None:
        """Clears accumulated gradients"""
        for _, parameter in self.named_parameters():
            parameter.grad = None

    def astype(self, dtype) -> "Layer":
        """
        Casts all parameters and buffers in place.
        """
        for parameter in self._parameters.values():
            parameter.value = parameter.value.astype(dtype)
            parameter.grad = None
        for name, value in self._buffers.items():
            self._buffers[name] = value.astype(dtype)
        for child in self._children.values():
            child.astype(dtype)

        return self

    def state_dict(self) -> Dict[str, Tensor]:
        """
        All parameters followed by all buffers, keyed by dotted name.
        """
        state = {name: parameter.value for name, parameter in self.named_parameters()}
        state.update(dict(self.named_buffers()))
        return state

    def load_state_dict(self, blobs: Dict[str, Tensor]) -> None:
        """
          Copies blobs into parameters and buffers in place. Every name must be present exactly once,
          with a matching shape.

        :raises CheckpointUnknownBlobError: for blobs the layer does not have.
        :raises CheckpointMissingBlobError: for parameters or buffers without a blob.
        """
        state = self.state_dict()
        unknown = set(blobs) - set(state)
        if unknown:
            raise CheckpointUnknownBlobError(unknown)
        missing = set(state) - set(blobs)
        if missing:
            raise CheckpointMissingBlobError(missing)

        for name, target in state.items():
            if blobs[name].shape != target.shape:
                raise CheckpointFormatError(f"Blob '{name}' has shape {blobs[name].shape}, expected {target.shape}")
            target[...] = blobs[name]

    @abstractmethod
    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        """
        Computes the layer output.
        """

    @abstractmethod
    def backward(self, dout: Tensor) -> Tensor:
        """
        Accumulates parameter gradients for the last training forward pass and returns the input gradient.
        """

    def __call__(self, x: Tensor, training: bool = False) -> Tensor:
        return self.forward(x, training)


class Sequential(Layer):
    """
    Runs sub-layers one after another.
    """

    def __init__(self, layers: Union[Sequence[Layer], Dict[str, Layer]]):
        super().__init__()
        if not isinstance(layers, dict):
            layers = {str(index): layer for index, layer in enumerate(layers)}
        for name, layer in layers.items():
            self.add_child(name, layer)

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        for layer in self.children.values():
            x = layer.forward(x, training)
        return x

    def backward(self, dout: Tensor) -> Tensor:
        for layer in reversed(list(self.children.values())):
            dout = layer.backward(dout)
        return dout


class Parallel(Layer):
    """
    Feeds the same input to every branch and concatenates the branch outputs along channels.
    """

    def __init__(self, branches: Dict[str, Layer]):
        super().__init__()
        for name, branch in branches.items():
            self.add_child(name, branch)
        self._channels: List[int] = []

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        outputs = [branch.forward(x, training) for branch in self.children.values()]
        for name, output in zip(self.children, outputs):
            if output.shape[2:] != outputs[0].shape[2:]:
                raise ShapeMismatchError(
                    f"{type(self).__name__} branch '{name}'", "H, W", outputs[0].shape[2:], output.shape[2:]
                )
        if training:
            self._channels = [output.shape[1] for output in outputs]

        return concat_channels(outputs)

    def backward(self, dout: Tensor) -> Tensor:
        dx = None
        for branch, dbranch in zip(self.children.values(), split_channels(dout, self._channels)):
            grad = branch.backward(numpy.ascontiguousarray(dbranch))
            dx = grad if dx is None else dx + grad
        return dx
