"""
 Run configuration: JSON file plus command-line overrides.
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

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from typing import Optional, Dict, Any, List, Type

from dataclasses_json import DataClassJsonMixin, Undefined, config
from dataclasses_json.undefined import UndefinedParameterError

from hepaclass.data import AugmentationConfig, PatchConfig, SPLIT_STRATEGIES
from hepaclass.exceptions import ConfigError
from hepaclass.nn import ModelConfig
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat
from hepaclass.training import TrainConfig

CONFIG_SECTIONS: Dict[str, Type[DataClassJsonMixin]] = {
    "model": ModelConfig,
    "train": TrainConfig,
    "augmentation": AugmentationConfig,
    "patches": PatchConfig,
}

# flag names that read better than the field name
FLAG_ALIASES = {"augmentation.enabled": "augment"}

# keys set from other keys
DERIVED_KEYS = {"train.seed"}


@dataclass
class RunConfig(DataClassJsonMixin):
    """
    Everything a prepare or train run reads. `seed` drives the split, initialization and batch order;
    `train.seed` is replaced by it.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    augmentation: AugmentationConfig = field(default_factory=AugmentationConfig)
    patches: PatchConfig = field(default_factory=PatchConfig)
    seed: int = 0
    split_strategy: str = "lesion_level"
    workers: Optional[int] = None

    def __post_init__(self):
        if self.split_strategy not in SPLIT_STRATEGIES:
            raise ConfigError(f"split_strategy must be one of {SPLIT_STRATEGIES}, got '{self.split_strategy}'")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")

    @classmethod
    def parse(cls, values: Dict[str, Any]) -> "RunConfig":
        """
          Builds a config from a (possibly partial) nested dict.

        :raises ConfigError: for unknown keys or invalid values.
        """
        try:
            return cls.from_dict(values)
        except UndefinedParameterError as error:
            raise ConfigError(f"Unknown configuration key: {error}") from error
        except (KeyError, TypeError, ValueError) as error:
            raise ConfigError(f"Invalid configuration: {error}") from error

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        """
          Reads a JSON config file. Missing keys keep their defaults.
        """
        try:
            values = LocalStorage().read_blob(path, DictJsonSerializationFormat)
        except (json.JSONDecodeError, UnicodeDecodeError) as error:
            raise ConfigError(f"{path}: not a JSON document ({error})") from error
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected a JSON object")

        return cls.parse(values)

    def with_overrides(self, overrides: Dict[str, Any]) -> "RunConfig":
        """
          New config with dotted keys (`train.max_epochs`, `seed`) replaced.

        :raises ConfigError: for unknown keys or invalid values.
        """
        values = self.to_dict()
        for key, value in overrides.items():
            section, _, name = key.rpartition(".")
            if section not in ("", *CONFIG_SECTIONS) or name not in (values[section] if section else values):
                raise ConfigError(f"Unknown configuration key: {key}")
            (values[section] if section else values)[name] = value

        return self.parse(values)

    def train_config(self) -> TrainConfig:
        """Train settings seeded with the run seed"""
        return dataclasses.replace(self.train, seed=self.seed)


@dataclass(frozen=True)
class ConfigFlag:
    """
    A command-line flag overriding one config key.
    """

    flag: str
    key: str
    value_type: type
    nargs: Optional[int] = None


def _unwrap(annotation) -> tuple:
    """(scalar type, nargs) of a field annotation"""
    if typing.get_origin(annotation) is typing.Union:
        annotation = next(arg for arg in typing.get_args(annotation) if arg is not type(None))
    if typing.get_origin(annotation) is tuple:
        args = typing.get_args(annotation)
        return args[0], len(args)
    return annotation, None


def config_flags() -> List[ConfigFlag]:
    """
      One flag per RunConfig key. A field name declared in several places keeps the plain flag for its first
      declaration (run, model, train, augmentation, patches) and gets a section prefix elsewhere.
    """
    run_hints = typing.get_type_hints(RunConfig)
    declarations = [
        ("", run_field.name, run_hints[run_field.name])
        for run_field in dataclasses.fields(RunConfig)
        if run_field.name not in CONFIG_SECTIONS
    ]
    for section, section_type in CONFIG_SECTIONS.items():
        declarations.extend(
            (section, section_field.name, typing.get_type_hints(section_type)[section_field.name])
            for section_field in dataclasses.fields(section_type)
        )

    flags, seen = [], set()
    for section, name, annotation in declarations:
        key = f"{section}.{name}" if section else name
        if key in DERIVED_KEYS:
            continue
        flag_name = FLAG_ALIASES.get(key, name if name not in seen else f"{section}_{name}")
        seen.add(name)
        value_type, nargs = _unwrap(annotation)
        flags.append(ConfigFlag(flag="--" + flag_name.replace("_", "-"), key=key, value_type=value_type, nargs=nargs))

    return flags
