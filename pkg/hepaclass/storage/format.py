"""
Serialization formats for saving hepaclass artifacts as files.
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
import json
import struct
import zipfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Generic, TypeVar, Dict, Any

import numpy
import pandas

from hepaclass.exceptions import (
    CheckpointFormatError,
    CheckpointVersionError,
    CheckpointTruncatedError,
    OverlayError,
)

T = TypeVar("T")  # pylint: disable=C0103

CHECKPOINT_MAGIC = b"LFCKPT01"
CHECKPOINT_FORMAT_VERSION = 1
BLOB_DTYPE = numpy.dtype("<f4")
CHECKPOINT_HEADER_KEYS = {"format_version", "config", "metadata", "blobs"}
BLOB_ENTRY_KEYS = {"name", "shape", "offset", "nbytes"}

# fixed member timestamp, keeps archives byte-identical between runs
_ZIP_DATE_TIME = (1980, 1, 1, 0, 0, 0)


class SerializationFormat(ABC, Generic[T]):
    """
    Abstract serialization format.
    """

    @abstractmethod
    def serialize(self, data: T) -> bytes:
        """
        Serializes data to bytes given a format.
        :param data: Data to serialize.
        :return: Serialized data as byte array.
        """

    @abstractmethod
    def deserialize(self, data: bytes) -> T:
        """
        Deserializes data from bytes given a format.
        :param data: Data to deserialize.
        :return: Deserialized data.
        """


class DictJsonSerializationFormat(SerializationFormat[Dict[str, Any]]):
    """
    Serializes dictionaries as indented JSON with sorted keys.
    """

    def serialize(self, data: Dict[str, Any]) -> bytes:
        return (json.dumps(data, indent=2, sort_keys=True) + "\n").encode(encoding="utf-8")

    def deserialize(self, data: bytes) -> Dict[str, Any]:
        return json.loads(data.decode(encoding="utf-8"))


class DataFrameCsvSerializationFormat(SerializationFormat[pandas.DataFrame]):
    """
    Serializes dataframes as CSV format.
    """

    def serialize(self, data: pandas.DataFrame) -> bytes:
        """
        Serializes dataframe to bytes using CSV format.
        :param data: Dataframe to serialize.
        :return: CSV serialized dataframe as byte array.
        """
        return data.to_csv(index=False, lineterminator="\n").encode(encoding="utf-8")

    def deserialize(self, data: bytes) -> pandas.DataFrame:
        """
        Deserializes dataframe from bytes using CSV format.
        :param data: Dataframe to deserialize in CSV format as bytes.
        :return: Deserialized dataframe.
        """
        return pandas.read_csv(io.BytesIO(data))


@dataclass
class CheckpointContent:
    """
    Decoded checkpoint: JSON header fields plus named float32 blobs, in file order.
    """

    config: Dict[str, Any]
    metadata: Dict[str, Any]
    blobs: Dict[str, numpy.ndarray] = field(default_factory=dict)
    format_version: int = CHECKPOINT_FORMAT_VERSION


def _valid_blob_entry(entry: Any) -> bool:
    if not isinstance(entry, dict) or not BLOB_ENTRY_KEYS <= set(entry):
        return False
    if not isinstance(entry["name"], str) or not isinstance(entry["shape"], list):
        return False
    counts = [*entry["shape"], entry["offset"], entry["nbytes"]]
    return all(isinstance(count, int) and not isinstance(count, bool) and count >= 0 for count in counts)


class CheckpointSerializationFormat(SerializationFormat[CheckpointContent]):
    """
    Model checkpoint layout:

      8 bytes   magic b"LFCKPT01"
      8 bytes   header length, unsigned little-endian
      N bytes   UTF-8 JSON header {format_version, config, metadata, blobs: [{name, shape, offset, nbytes}]}
      ...       raw little-endian float32 blobs, offsets relative to the end of the header
    """

    def serialize(self, data: CheckpointContent) -> bytes:
        directory = []
        payload = io.BytesIO()
        for name, value in data.blobs.items():
            raw = numpy.ascontiguousarray(value, dtype=BLOB_DTYPE).tobytes()
            directory.append({"name": name, "shape": list(value.shape), "offset": payload.tell(), "nbytes": len(raw)})
            payload.write(raw)

        header = json.dumps(
            {
                "format_version": data.format_version,
                "config": data.config,
                "metadata": data.metadata,
                "blobs": directory,
            },
            sort_keys=True,
            separators=(",", ":"),
        ).encode(encoding="utf-8")

        return CHECKPOINT_MAGIC + struct.pack("<Q", len(header)) + header + payload.getvalue()

    def deserialize(self, data: bytes) -> CheckpointContent:
        if data[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
            raise CheckpointFormatError(f"Not a checkpoint: expected magic {CHECKPOINT_MAGIC!r}, got {data[:8]!r}")

        header_start = len(CHECKPOINT_MAGIC) + 8
        if len(data) < header_start:
            raise CheckpointTruncatedError(f"Checkpoint header length is missing: {len(data)} bytes in total")

        (header_length,) = struct.unpack("<Q", data[len(CHECKPOINT_MAGIC) : header_start])
        payload_start = header_start + header_length
        if len(data) < payload_start:
            raise CheckpointTruncatedError(
                f"Checkpoint header claims {header_length} bytes, only {len(data) - header_start} available"
            )

        try:
            header = json.loads(data[header_start:payload_start].decode(encoding="utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as error:
            raise CheckpointFormatError(f"Checkpoint header is not valid JSON: {error}") from error
        if not isinstance(header, dict):
            raise CheckpointFormatError(f"Checkpoint header must be a JSON object, got {type(header).__name__}")

        if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointVersionError(
                f"Unsupported checkpoint format version {header.get('format_version')},"
                f" expected {CHECKPOINT_FORMAT_VERSION}"
            )

        missing_keys = sorted(CHECKPOINT_HEADER_KEYS - set(header))
        if missing_keys:
            raise CheckpointFormatError(f"Checkpoint header lacks {', '.join(missing_keys)}")
        if not isinstance(header["blobs"], list):
            raise CheckpointFormatError("Checkpoint header 'blobs' must be a list")

        blobs = {}
        for entry in header["blobs"]:
            if not _valid_blob_entry(entry):
                raise CheckpointFormatError(
                    f"Checkpoint blob entry {entry!r} needs a name, a shape list and non-negative offset and nbytes"
                )
            start = payload_start + entry["offset"]
            end = start + entry["nbytes"]
            if end > len(data):
                raise CheckpointTruncatedError(
                    f"Blob '{entry['name']}' needs bytes {start}..{end}, checkpoint has {len(data)}"
                )
            if entry["nbytes"] != int(numpy.prod(entry["shape"], dtype=numpy.int64)) * BLOB_DTYPE.itemsize:
                raise CheckpointFormatError(f"Blob '{entry['name']}' size does not match its shape {entry['shape']}")

            blobs[entry["name"]] = numpy.frombuffer(data[start:end], dtype=BLOB_DTYPE).reshape(entry["shape"]).copy()

        return CheckpointContent(
            config=header["config"],
            metadata=header["metadata"],
            blobs=blobs,
            format_version=header["format_version"],
        )


class PatchArchiveSerializationFormat(SerializationFormat[Dict[str, numpy.ndarray]]):
    """
    Named arrays as an uncompressed `.npz` archive. Members are written in key order with a fixed
    timestamp, so equal inputs give byte-identical files.
    """

    def serialize(self, data: Dict[str, numpy.ndarray]) -> bytes:
        buffer = io.BytesIO()
        with zipfile.ZipFile(buffer, mode="w", compression=zipfile.ZIP_STORED) as archive:
            for name, value in data.items():
                member = io.BytesIO()
                numpy.lib.format.write_array(member, numpy.asanyarray(value), allow_pickle=False)
                archive.writestr(zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_DATE_TIME), member.getvalue())

        return buffer.getvalue()

    def deserialize(self, data: bytes) -> Dict[str, numpy.ndarray]:
        with numpy.load(io.BytesIO(data), allow_pickle=False) as archive:
            return {name: archive[name] for name in archive.files}


class PpmImageSerializationFormat(SerializationFormat[numpy.ndarray]):
    """
    (H, W, 3) uint8 RGB images as binary PPM (P6).
    """

    def serialize(self, data: numpy.ndarray) -> bytes:
        if data.ndim != 3 or data.shape[2] != 3 or data.dtype != numpy.uint8:
            raise OverlayError(f"PPM images must be (H, W, 3) uint8 arrays, got {data.shape} {data.dtype}")

        height, width, _ = data.shape
        return f"P6\n{width} {height}\n255\n".encode(encoding="ascii") + numpy.ascontiguousarray(data).tobytes()

    def deserialize(self, data: bytes) -> numpy.ndarray:
        magic, size, max_value, pixels = data.split(b"\n", 3)
        if magic != b"P6" or max_value != b"255":
            raise OverlayError(f"Unsupported PPM header: {magic!r} {max_value!r}")

        width, height = (int(value) for value in size.split())
        return numpy.frombuffer(pixels, dtype=numpy.uint8, count=width * height * 3).reshape(height, width, 3)


class RawBytesSerializationFormat(SerializationFormat[bytes]):
    """
    Bytes written and read unchanged.
    """

    def serialize(self, data: bytes) -> bytes:
        return bytes(data)

    def deserialize(self, data: bytes) -> bytes:
        return data
