"""
 Local filesystem storage for hepaclass artifacts.
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

import os
import tempfile
from typing import final, Type, TypeVar

from hepaclass.storage.format import SerializationFormat

T = TypeVar("T")  # pylint: disable=C0103


@final
class LocalStorage:
    """
    Reads and writes serialized artifacts on a regular filesystem.
    """

    def save_data_as_blob(
        self,
        data: T,
        blob_path: str,
        serialization_format: Type[SerializationFormat[T]],
        overwrite: bool = True,
    ) -> None:
        """
          Serializes `data` and writes it to `blob_path`. The file is written to a temporary file in the
          target directory first and renamed into place, so readers never observe a partial file.

        :param data: Data to save.
        :param blob_path: Target file path. Parent directories are created.
        :param serialization_format: Format to serialize with.
        :param overwrite: Whether to replace an existing file.
        """
        if not overwrite and os.path.exists(blob_path):
            raise FileExistsError(f"{blob_path} already exists")

        bytes_ = serialization_format().serialize(data)
        target_dir = os.path.dirname(os.path.abspath(blob_path))
        os.makedirs(target_dir, exist_ok=True)

        file_descriptor, temp_path = tempfile.mkstemp(
            dir=target_dir, prefix=".tmp-", suffix=os.path.basename(blob_path)
        )
        try:
            with os.fdopen(file_descriptor, "wb") as target:
                target.write(bytes_)
            os.replace(temp_path, blob_path)
        except BaseException:
            if os.path.exists(temp_path):
                os.remove(temp_path)
            raise

    def read_blob(self, blob_path: str, serialization_format: Type[SerializationFormat[T]]) -> T:
        """
          Reads and deserializes a single file.

        :param blob_path: File path.
        :param serialization_format: Format to deserialize with.
        :return: Deserialized data.
        """
        with open(blob_path, "rb") as blob_file:
            return serialization_format().deserialize(blob_file.read())

    def blob_exists(self, blob_path: str) -> bool:
        """
        Checks if a file exists at `blob_path`.
        """
        return os.path.isfile(blob_path)
