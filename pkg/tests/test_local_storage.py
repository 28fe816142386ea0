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

import os
import pathlib

import pytest

from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat, RawBytesSerializationFormat


def test_blob_exists(tmp_path):
    local_storage = LocalStorage()

    assert local_storage.blob_exists(str(pathlib.Path(__file__)))
    assert not local_storage.blob_exists(str(tmp_path))
    assert not local_storage.blob_exists(str(tmp_path / "missing.json"))


def test_save_data_as_blob(tmp_path):
    local_path = str(tmp_path / "nested" / "dirs" / "data.json")
    local_storage = LocalStorage()

    local_storage.save_data_as_blob(
        data={"key": "value"},
        blob_path=local_path,
        serialization_format=DictJsonSerializationFormat,
    )

    with open(local_path, "rb") as test_data:
        assert DictJsonSerializationFormat().deserialize(test_data.read()) == {"key": "value"}
    assert local_storage.read_blob(local_path, DictJsonSerializationFormat) == {"key": "value"}
    assert os.listdir(os.path.dirname(local_path)) == ["data.json"]


def test_save_data_as_blob_overwrite(tmp_path):
    local_path = str(tmp_path / "data.bin")
    local_storage = LocalStorage()
    local_storage.save_data_as_blob(b"first", local_path, RawBytesSerializationFormat)
    local_storage.save_data_as_blob(b"second", local_path, RawBytesSerializationFormat)

    assert local_storage.read_blob(local_path, RawBytesSerializationFormat) == b"second"

    with pytest.raises(FileExistsError):
        local_storage.save_data_as_blob(b"third", local_path, RawBytesSerializationFormat, overwrite=False)

    assert local_storage.read_blob(local_path, RawBytesSerializationFormat) == b"second"


def test_save_data_as_blob_keeps_target_on_failure(tmp_path):
    local_path = str(tmp_path / "data.json")
    local_storage = LocalStorage()
    local_storage.save_data_as_blob({"key": "value"}, local_path, DictJsonSerializationFormat)

    with pytest.raises(TypeError):
        local_storage.save_data_as_blob({"key": object()}, local_path, DictJsonSerializationFormat)

    assert local_storage.read_blob(local_path, DictJsonSerializationFormat) == {"key": "value"}
    assert os.listdir(str(tmp_path)) == ["data.json"]
