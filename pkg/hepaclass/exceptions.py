"""
 Exceptions raised by hepaclass modules.
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

from typing import Iterable


class HepaclassError(Exception):
    """Base exception for all hepaclass errors"""


class ConfigError(HepaclassError):
    """Invalid configuration value or unknown configuration key"""


class ShapeMismatchError(HepaclassError):
    """Tensor shapes do not agree"""

    def __init__(self, operation: str, dimension: str, expected, actual):
        super().__init__(f"{operation}: dimension '{dimension}' mismatch, expected {expected}, got {actual}")
        self.operation = operation
        self.dimension = dimension
        self.expected = expected
        self.actual = actual


class KernelArgumentError(HepaclassError):
    """Kernel argument outside of its valid range"""


class NonFiniteError(HepaclassError):
    """A loss or gradient contains NaN or Inf"""

    def __init__(self, name: str, details: str = ""):
        super().__init__(f"Non-finite values in '{name}'{': ' + details if details else ''}")
        self.name = name


class CheckpointFormatError(HepaclassError):
    """Checkpoint bytes are not a valid checkpoint"""


class CheckpointVersionError(CheckpointFormatError):
    """Checkpoint written by an unsupported format version"""


class CheckpointTruncatedError(CheckpointFormatError):
    """Checkpoint data section is shorter than its directory claims"""


class CheckpointUnknownBlobError(CheckpointFormatError):
    """Checkpoint holds a blob the model does not have"""

    def __init__(self, names: Iterable[str]):
        self.names = sorted(names)
        super().__init__(f"Checkpoint contains unknown blobs: {', '.join(self.names)}")


class CheckpointMissingBlobError(CheckpointFormatError):
    """Checkpoint lacks a blob the model requires"""

    def __init__(self, names: Iterable[str]):
        self.names = sorted(names)
        super().__init__(f"Checkpoint is missing blobs: {', '.join(self.names)}")


class PretrainedShapeConflictError(HepaclassError):
    """Pretrained blobs do not fit the assembled model"""

    def __init__(self, conflicts: Iterable[str]):
        self.conflicts = list(conflicts)
        super().__init__("Pretrained weights do not match the model: " + "; ".join(self.conflicts))


class VolumeFormatError(HepaclassError):
    """Volume sidecar or raw file is invalid"""


class ManifestError(HepaclassError):
    """Dataset manifest does not match its schema"""


class LesionExtractionError(HepaclassError):
    """Lesion records or patches cannot be produced from a mask"""


class SplitError(HepaclassError):
    """Dataset split cannot be produced"""


class MetricsError(HepaclassError):
    """Metrics cannot be computed from the given inputs"""


class OverlayError(HepaclassError):
    """Overlay cannot be rendered"""
