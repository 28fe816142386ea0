"""
 Dataset manifest schema and reader.
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

import io
import os

import pandas
import pandera
from pandera.typing import Series

from hepaclass.data._models import LABELS
from hepaclass.exceptions import ManifestError
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DataFrameCsvSerializationFormat

MANIFEST_FILE_NAME = "manifest.csv"


class ManifestCsvSerializationFormat(DataFrameCsvSerializationFormat):
    """
    Manifest CSV with every column read as text.
    """

    def deserialize(self, data: bytes) -> pandas.DataFrame:
        return pandas.read_csv(io.BytesIO(data), dtype=str, keep_default_na=False)


class DatasetManifestSchema(pandera.DataFrameModel):
    """
    One row per lesion. `lesion_id` is `<patient/volume id>-<mask id>`, paths are relative to the manifest directory
    or absolute.
    """

    lesion_id: Series[str] = pandera.Field(unique=True)
    patient_id: Series[str]
    volume_path: Series[str]
    mask_path: Series[str]
    label: Series[str] = pandera.Field(isin=list(LABELS))

    class Config:
        """Schema settings"""

        strict = True
        coerce = True


def mask_id_of(lesion_id: str) -> int:
    """
      Mask label value encoded as the integer after the last '-' of a lesion id.
    """
    _, _, suffix = lesion_id.rpartition("-")
    if not suffix.isdigit():
        raise ManifestError(f"Lesion id '{lesion_id}' does not end with '-<mask id>'")

    return int(suffix)


def manifest_path(data_dir: str) -> str:
    """Manifest location inside a dataset directory"""
    return os.path.join(data_dir, MANIFEST_FILE_NAME)


def read_manifest(path: str) -> pandas.DataFrame:
    """
      Reads and validates a dataset manifest. Relative volume and mask paths are resolved against the
      manifest directory.

    :param path: Manifest CSV file, or a dataset directory containing `manifest.csv`.
    :return: Validated manifest sorted by lesion_id.
    :raises ManifestError: if the manifest does not match DatasetManifestSchema.
    """
    if os.path.isdir(path):
        path = manifest_path(path)

    raw = LocalStorage().read_blob(path, ManifestCsvSerializationFormat)
    try:
        manifest = DatasetManifestSchema.validate(raw)
    except (pandera.errors.SchemaError, pandera.errors.SchemaErrors) as error:
        raise ManifestError(f"{path}: {error}") from error

    for lesion_id in manifest["lesion_id"]:
        mask_id_of(lesion_id)

    base_dir = os.path.dirname(os.path.abspath(path))
    for column in ["volume_path", "mask_path"]:
        manifest[column] = manifest[column].map(lambda value: os.path.join(base_dir, value))

    return manifest.sort_values("lesion_id", kind="stable").reset_index(drop=True)


def write_manifest(manifest: pandas.DataFrame, path: str) -> None:
    """
      Validates and writes a dataset manifest.
    """
    try:
        validated = DatasetManifestSchema.validate(manifest)
    except (pandera.errors.SchemaError, pandera.errors.SchemaErrors) as error:
        raise ManifestError(f"{path}: {error}") from error

    LocalStorage().save_data_as_blob(
        validated[list(DatasetManifestSchema.to_schema().columns)], path, DataFrameCsvSerializationFormat
    )
