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

import logging
import os
from dataclasses import dataclass
from typing import List

import pytest

from hepaclass.data import PatchConfig, PatchDataset, SplitManifest, prepare_dataset
from hepaclass.logs import SemanticLogger, create_run_logger
from hepaclass.logs.models import LogLevel
from hepaclass.nn import ModelConfig
from hepaclass.phantom import PhantomSpec, generate

TEST_PATCH_SIZE = (32, 32)


@dataclass
class PreparedData:
    path: str
    dataset: PatchDataset
    split: SplitManifest


@pytest.fixture(scope="session", autouse=True)
def set_env():
    os.environ |= {
        "HEPACLASS__WORKERS": "2",
        "PYTHONUNBUFFERED": "1",
    }


@pytest.fixture
def tiny_model_config() -> ModelConfig:
    return ModelConfig(width_multiplier=0.25, feature_width=16, head_width=16, input_size=TEST_PATCH_SIZE)


@pytest.fixture(scope="session")
def tiny_phantom_spec() -> PhantomSpec:
    return PhantomSpec(
        n_lesions=20,
        seed=3,
        cyst_mean_ml=0.4,
        metastasis_mean_ml=1.5,
        volume_min_ml=0.05,
        volume_max_ml=4.0,
    )


@pytest.fixture(scope="session")
def phantom_dir(tmp_path_factory, tiny_phantom_spec) -> str:
    path = str(tmp_path_factory.mktemp("phantom"))
    generate(tiny_phantom_spec, path)
    return path


@pytest.fixture(scope="session")
def prepared(tmp_path_factory, phantom_dir) -> PreparedData:
    path = str(tmp_path_factory.mktemp("prepared"))
    dataset, split = prepare_dataset(
        phantom_dir, path, seed=0, patch_config=PatchConfig(target_size=TEST_PATCH_SIZE), workers=2
    )
    return PreparedData(path=path, dataset=dataset, split=split)


@pytest.fixture
def captured_logger():
    class ListHandler(logging.Handler):
        def __init__(self):
            super().__init__()
            self.records: List[logging.LogRecord] = []

        def emit(self, record: logging.LogRecord) -> None:
            self.records.append(record)

    handler = ListHandler()
    logger: SemanticLogger = create_run_logger(
        run_name=f"test-{os.getpid()}-{id(handler)}", min_log_level=LogLevel.DEBUG, log_handlers=[handler]
    )
    return logger, handler.records
