"""
 Raw volume + JSON sidecar reader and writer.
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

import json
import os
from dataclasses import dataclass
from typing import List, Tuple

import numpy
from dataclasses_json import DataClassJsonMixin

from hepaclass.data._models import VolumeWithMask
from hepaclass.exceptions import VolumeFormatError
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat, RawBytesSerializationFormat

VOXEL_DTYPES = {"int16": "i2", "uint16": "u2"}

BYTE_ORDERS = {"little": "<", "big": ">"}


@dataclass
class VolumeHeader(DataClassJsonMixin):
    """
    `<name>.json` sidecar of a `<name>.raw` voxel file. Voxels are stored in C order over `dims` = [x, y, z].
    """

    dims: List[int]
    spacing: List[float]
    dtype: str
    order: str = "little"

    @property
    def numpy_dtype(self) -> numpy.dtype:
        """Voxel dtype including byte order"""
        return numpy.dtype(BYTE_ORDERS[self.order] + VOXEL_DTYPES[self.dtype])

    @property
    def expected_bytes(self) -> int:
        """Size of the raw file described by this header"""
        return int(numpy.prod(self.dims, dtype=numpy.int64)) * self.numpy_dtype.itemsize


def volume_file_paths(path: str) -> Tuple[str, str]:
    """
      Sidecar and raw paths of a volume given as `<name>`, `<name>.json` or `<name>.raw`.
    """
    stem, extension = os.path.splitext(path)
    if extension not in (".json", ".raw"):
        stem = path

    return f"{stem}.json", f"{stem}.raw"


def read_header(json_path: str) -> VolumeHeader:
    """
      Reads and validates a volume sidecar.

    :raises VolumeFormatError: for malformed headers, unknown dtypes or byte orders.
    """
    try:
        header = VolumeHeader.from_dict(LocalStorage().read_blob(json_path, DictJsonSerializationFormat))
    except (json.JSONDecodeError, UnicodeDecodeError, KeyError, TypeError, ValueError) as error:
        raise VolumeFormatError(f"{json_path}: invalid volume header ({error})") from error

    if header.dtype not in VOXEL_DTYPES:
        raise VolumeFormatError(
            f"{json_path}: unknown dtype '{header.dtype}', expected one of {sorted(VOXEL_DTYPES)}"
        )
    if header.order not in BYTE_ORDERS:
        raise VolumeFormatError(f"{json_path}: unknown byte order '{header.order}', expected little or big")
    if len(header.dims) != 3 or min(header.dims) < 1:
        raise VolumeFormatError(f"{json_path}: dims must be three positive integers, got {header.dims}")

    return header


def read_volume_file(path: str) -> Tuple[numpy.ndarray, VolumeHeader]:
    """
      Reads one raw voxel file through its sidecar.

    :param path: `<name>`, `<name>.json` or `<name>.raw`.
    :return: Array of shape `dims` in native byte order, and the header.
    :raises VolumeFormatError: if the raw byte count differs from the header.
    """
    json_path, raw_path = volume_file_paths(path)
    header = read_header(json_path)
    raw = LocalStorage().read_blob(raw_path, RawBytesSerializationFormat)
    if len(raw) != header.expected_bytes:
        raise VolumeFormatError(
            f"{raw_path}: expected {header.expected_bytes} bytes for dims {header.dims} {header.dtype},"
            f" got {len(raw)} bytes"
        )

    array = numpy.frombuffer(raw, dtype=header.numpy_dtype).reshape(header.dims)
    return array.astype(header.numpy_dtype.newbyteorder("="), copy=True), header


def load_volume(volume_path: str, mask_path: str) -> VolumeWithMask:
    """
      Loads a CT volume and its lesion mask.

    :param volume_path: Volume `<name>`, `<name>.json` or `<name>.raw`.
    :param mask_path: Mask path in the same convention.
    :return: VolumeWithMask with spacing from the volume header.
    :raises VolumeFormatError: for invalid headers, byte count mismatches or differing dims.
    """
    intensities, header = read_volume_file(volume_path)
    mask, mask_header = read_volume_file(mask_path)
    if list(mask_header.dims) != list(header.dims):
        raise VolumeFormatError(f"{mask_path}: mask dims {mask_header.dims} differ from volume dims {header.dims}")

    return VolumeWithMask(
        intensities=intensities,
        mask=mask,
        spacing=tuple(header.spacing),
        name=os.path.basename(volume_file_paths(volume_path)[0])[: -len(".json")],
    )


def save_volume(array: numpy.ndarray, spacing: Tuple[float, float, float], path: str) -> str:
    """
      Writes `<name>.json` and little-endian `<name>.raw` for an int16 or uint16 array.

    :param array: 3-D voxel array.
    :param spacing: Voxel spacing in mm.
    :param path: `<name>`, `<name>.json` or `<name>.raw`.
    :return: Path of the sidecar.
    """
    dtype_name = numpy.dtype(array.dtype).name
    if dtype_name not in VOXEL_DTYPES:
        raise VolumeFormatError(f"{path}: cannot store {dtype_name} voxels, expected one of {sorted(VOXEL_DTYPES)}")

    json_path, raw_path = volume_file_paths(path)
    header = VolumeHeader(dims=list(array.shape), spacing=[float(value) for value in spacing], dtype=dtype_name)
    storage = LocalStorage()
    storage.save_data_as_blob(
        numpy.ascontiguousarray(array, dtype=header.numpy_dtype).tobytes(), raw_path, RawBytesSerializationFormat
    )
    storage.save_data_as_blob(header.to_dict(), json_path, DictJsonSerializationFormat)

    return json_path
