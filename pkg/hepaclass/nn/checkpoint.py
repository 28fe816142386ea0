"""
 Model checkpoint save and load.
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

from dataclasses_json.undefined import UndefinedParameterError

from hepaclass.exceptions import CheckpointFormatError, ConfigError
from hepaclass.logs import SemanticLogger
from hepaclass.nn.model import Model, ModelConfig, CheckpointMetadata
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import CheckpointContent, CheckpointSerializationFormat


def to_checkpoint_content(model: Model) -> CheckpointContent:
    """
    Config, metadata and every parameter and buffer of `model`, in model order.
    """
    return CheckpointContent(
        config=model.config.to_dict(),
        metadata=model.metadata.to_dict(),
        blobs=dict(model.state_dict()),
    )


def from_checkpoint_content(content: CheckpointContent) -> Model:
    """
      Rebuilds a model from decoded checkpoint content. The stored config is kept as is,
      pretrained weights it names are not imported again.

    :raises CheckpointFormatError: if the stored config is invalid.
    :raises CheckpointUnknownBlobError: for blobs the model does not have.
    :raises CheckpointMissingBlobError: for model blobs absent from the checkpoint.
    """
    try:
        cfg = ModelConfig.from_dict(content.config)
        metadata = CheckpointMetadata.from_dict(content.metadata)
    except (ConfigError, UndefinedParameterError, KeyError, TypeError, ValueError) as error:
        raise CheckpointFormatError(f"Checkpoint header has an invalid config: {error}") from error

    model = Model(cfg, metadata.seed)
    model.load_state_dict(content.blobs)
    model.metadata = metadata
    return model


def save_checkpoint(model: Model, path: str, logger: Optional[SemanticLogger] = None) -> None:
    """
      Writes `model` to `path` atomically.

    :param model: Model to save.
    :param path: Target file.
    :param logger: Optional logger.
    """
    LocalStorage().save_data_as_blob(to_checkpoint_content(model), path, CheckpointSerializationFormat)
    if logger:
        logger.debug("Saved checkpoint {path} (epoch {epoch})", path=path, epoch=model.metadata.epoch)


def load_checkpoint(path: str) -> Model:
    """
      Reads a model saved by `save_checkpoint`.

    :param path: Checkpoint file.
    :return: Model with restored weights, running statistics, config and metadata.
    """
    return from_checkpoint_content(LocalStorage().read_blob(path, CheckpointSerializationFormat))
