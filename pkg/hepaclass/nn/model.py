"""
 Classifier assembly, initialization, pretrained import and inference.
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
from typing import Optional, Tuple, Dict, Sequence

import numpy
from dataclasses_json import DataClassJsonMixin, Undefined, config

from hepaclass.exceptions import ConfigError, PretrainedShapeConflictError, ShapeMismatchError
from hepaclass.logs import SemanticLogger
from hepaclass.nn._base import Layer, Sequential
from hepaclass.nn.inception import BlockConfig, AuxiliaryClassifier, build_backbone, BACKBONE_STAGES
from hepaclass.nn.layers import GlobalAvgPool, Dense, ReLU, Dropout
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import CheckpointSerializationFormat
from hepaclass.tensor import Tensor, softmax, require_ndim, BATCH_NORM_MOMENTUM, BATCH_NORM_EPSILON
from hepaclass.utils import derive_rng

BACKBONES = ["inception_plain", "inception_residual"]

# layers trained for the target task, left out of pretrained import on request
HEAD_PREFIXES = ("head.", "aux.")

AUX_HIDDEN_WIDTH = 64


@dataclass
class ModelConfig(DataClassJsonMixin):
    """
    Classifier architecture and loss settings.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    backbone: str = "inception_plain"
    feature_width: int = 256
    head_width: int = 512
    dropout_rate: float = 0.4
    num_classes: int = 2
    label_smoothing_eps: float = 0.1
    aux_weight: float = 0.3
    input_size: Tuple[int, int] = (128, 128)
    pretrained: Optional[str] = None
    pretrained_skip_head: bool = False
    width_multiplier: float = 1.0
    residual_scale: float = 0.2
    aux_attach: str = "reduction_2"
    factorized_n: int = 5
    bn_momentum: float = BATCH_NORM_MOMENTUM
    bn_eps: float = BATCH_NORM_EPSILON

    def __post_init__(self):
        self.input_size = tuple(self.input_size)
        if self.backbone not in BACKBONES:
            raise ConfigError(f"backbone must be one of {BACKBONES}, got '{self.backbone}'")
        if self.num_classes != 2:
            raise ConfigError(f"num_classes must be 2 (cyst, metastasis), got {self.num_classes}")
        if not 0 <= self.dropout_rate < 1:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not 0 <= self.label_smoothing_eps < 1:
            raise ConfigError(f"label_smoothing_eps must be in [0, 1), got {self.label_smoothing_eps}")
        if self.feature_width < 1 or self.head_width < 1:
            raise ConfigError(
                f"feature_width and head_width must be positive, got {self.feature_width}, {self.head_width}"
            )
        if self.aux_weight < 0:
            raise ConfigError(f"aux_weight must be non-negative, got {self.aux_weight}")
        if len(self.input_size) != 2 or min(self.input_size) < 1:
            raise ConfigError(f"input_size must be two positive integers, got {self.input_size}")
        if self.aux_attach not in BACKBONE_STAGES:
            raise ConfigError(
                f"aux_attach must name a backbone block ({', '.join(BACKBONE_STAGES)}), got '{self.aux_attach}'"
            )
        # validates width_multiplier and factorized_n
        self.block_config()

    def block_config(self) -> BlockConfig:
        """
        Block settings derived from this config.
        """
        return BlockConfig(
            use_residual=self.backbone == "inception_residual",
            residual_scale=self.residual_scale,
            width_multiplier=self.width_multiplier,
            factorized_n=self.factorized_n,
            bn_momentum=self.bn_momentum,
            bn_eps=self.bn_eps,
        )


@dataclass
class CheckpointMetadata(DataClassJsonMixin):
    """
    Training facts stored alongside model weights.
    """

    epoch: int = 0
    best_val_accuracy: float = 0.0
    seed: int = 0
    patch_target: Tuple[int, int] = (252, 210)

    def __post_init__(self):
        self.patch_target = tuple(self.patch_target)


class Head(Sequential):
    """
    GAP -> dense(feature_width, head_width) -> ReLU -> dropout -> dense(head_width, head_width) -> ReLU -> dropout
    -> dense(head_width, num_classes).
    """

    def __init__(self, feature_width: int, head_width: int, dropout_rate: float, num_classes: int, seed: int):
        dropout_seeds = derive_rng(seed, 1).integers(2**63, size=2)
        super().__init__(
            {
                "pool": GlobalAvgPool(),
                "fc1": Dense(feature_width, head_width),
                "relu1": ReLU(),
                "dropout1": Dropout(dropout_rate, int(dropout_seeds[0])),
                "fc2": Dense(head_width, head_width),
                "relu2": ReLU(),
                "dropout2": Dropout(dropout_rate, int(dropout_seeds[1])),
                "fc3": Dense(head_width, num_classes),
            }
        )


class Model(Layer):
    """
    Backbone, classification head and auxiliary classifier.
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        super().__init__()
        self.config = cfg
        self.metadata = CheckpointMetadata(seed=seed)
        backbone, channels = build_backbone(cfg.block_config(), cfg.feature_width)
        self.backbone = self.add_child("backbone", backbone)
        self.head = self.add_child(
            "head", Head(cfg.feature_width, cfg.head_width, cfg.dropout_rate, cfg.num_classes, seed)
        )
        self.aux = self.add_child(
            "aux",
            AuxiliaryClassifier(
                channels[cfg.aux_attach],
                cfg.block_config().width(AUX_HIDDEN_WIDTH),
                cfg.num_classes,
                cfg.block_config(),
            ),
        )

    def forward_with_aux(self, x: Tensor, training: bool = False) -> Tuple[Tensor, Tensor]:
        """
          Main and auxiliary logits.

        :param x: (N, 3, H, W) batch.
        :param training: Train mode (batch statistics, dropout, caches for backward).
        :return: (logits, aux_logits), both (N, num_classes).
        """
        aux_input = None
        for name, stage in self.backbone.children.items():
            x = stage.forward(x, training)
            if name == self.config.aux_attach:
                aux_input = x

        return self.head.forward(x, training), self.aux.forward(aux_input, training)

    def forward(self, x: Tensor, training: bool = False) -> Tensor:
        return self.forward_with_aux(x, training)[0]

    def backward(self, dout: Tensor, daux: Optional[Tensor] = None) -> Tensor:
        """
          Backpropagates main logit gradients, plus auxiliary logit gradients injected at the attachment stage.

        :param dout: Gradient of the main logits.
        :param daux: Gradient of the auxiliary logits, if the auxiliary loss is used.
        :return: Gradient with respect to the input batch.
        """
        grad = self.head.backward(dout)
        for name, stage in reversed(list(self.backbone.children.items())):
            if name == self.config.aux_attach and daux is not None:
                grad = grad + self.aux.backward(daux)
            grad = stage.backward(grad)

        return grad


def initialize(model: Layer, seed: int) -> None:
    """
      He-normal initialization of all weights with a fan-in, in parameter order. Biases and batch norm
      shifts stay 0, batch norm scales stay 1.

    :param model: Layer to initialize in place.
    :param seed: Initialization seed.
    """
    rng = derive_rng(seed, 0)
    for _, parameter in model.named_parameters():
        if parameter.fan_in:
            std = numpy.sqrt(2.0 / parameter.fan_in)
            parameter.value[...] = rng.normal(0.0, std, size=parameter.value.shape)


def import_pretrained(
    model: Model,
    blobs: Dict[str, Tensor],
    skip_prefixes: Sequence[str] = (),
    logger: Optional[SemanticLogger] = None,
) -> Dict[str, int]:
    """
      Overwrites model parameters and buffers with blobs of matching name and shape.

    :param model: Model to update in place.
    :param blobs: Named pretrained blobs.
    :param skip_prefixes: Names starting with any of these prefixes are left as initialized.
    :param logger: Optional logger.
    :return: Counts of imported, skipped and model-only names.
    :raises PretrainedShapeConflictError: if any shared name has a different shape; nothing is imported then.
    """
    state = model.state_dict()
    shared = [name for name in state if name in blobs and not name.startswith(tuple(skip_prefixes))]
    conflicts = [
        f"{name}: checkpoint {tuple(blobs[name].shape)} vs model {state[name].shape}"
        for name in shared
        if tuple(blobs[name].shape) != state[name].shape
    ]
    if conflicts:
        raise PretrainedShapeConflictError(conflicts)

    for name in shared:
        state[name][...] = blobs[name]

    summary = {
        "imported": len(shared),
        "skipped": len([name for name in blobs if name in state and name not in shared]),
        "unused": len([name for name in blobs if name not in state]),
        "not_in_checkpoint": len([name for name in state if name not in blobs]),
    }
    if logger:
        logger.info(
            "Imported {imported} pretrained blobs, skipped {skipped}, unused {unused}, missing {not_in_checkpoint}",
            **summary,
        )

    return summary


def build_model(cfg: ModelConfig, rng_seed: int = 0, logger: Optional[SemanticLogger] = None) -> Model:
    """
      Assembles and initializes a classifier. When `cfg.pretrained` is set, blobs of that checkpoint with
      matching names and shapes replace the random initialization.

    :param cfg: Model config.
    :param rng_seed: Initialization and dropout seed.
    :param logger: Optional logger.
    :return: Model ready for training or inference.
    """
    model = Model(cfg, rng_seed)
    initialize(model, rng_seed)

    if cfg.pretrained:
        content = LocalStorage().read_blob(cfg.pretrained, CheckpointSerializationFormat)
        import_pretrained(
            model, content.blobs, skip_prefixes=HEAD_PREFIXES if cfg.pretrained_skip_head else (), logger=logger
        )

    return model


def predict(model: Model, batch: Tensor) -> Tensor:
    """
      Class probabilities in inference mode. Does not modify the model.

    :param model: Classifier.
    :param batch: (N, 3, H, W) patch triplets.
    :return: (N, 2) probabilities, columns (cyst, metastasis).
    """
    require_ndim("predict", batch, 4)
    if batch.shape[1] != 3:
        raise ShapeMismatchError("predict", "C (patch triplet channels)", 3, batch.shape[1])

    return softmax(model.forward(batch, training=False))
