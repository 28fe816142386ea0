"""
 Data models of the lesion data pipeline.
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

from dataclasses import dataclass, field
from typing import Tuple, Optional, List

import numpy
from dataclasses_json import DataClassJsonMixin, Undefined, config

from hepaclass.exceptions import ConfigError, VolumeFormatError

# class index order of model outputs; metastasis is the positive class
LABELS = ("cyst", "metastasis")

PADDED_PATCH_SIZE = (252, 210)

PLANE_MODES = ["orthogonal", "adjacent"]

SPLIT_STRATEGIES = ["lesion_level", "patient_level"]


def label_index(label: str) -> int:
    """
    Class index of a label name.
    """
    try:
        return LABELS.index(label)
    except ValueError as error:
        raise ConfigError(f"Unknown lesion label '{label}', expected one of {LABELS}") from error


@dataclass
class VolumeWithMask:
    """
    CT intensities (HU) with a lesion label mask of identical dims, axes (x, y, z), z axial.
    """

    intensities: numpy.ndarray
    mask: numpy.ndarray
    spacing: Tuple[float, float, float]
    name: str = ""

    def __post_init__(self):
        self.spacing = tuple(float(value) for value in self.spacing)
        if self.intensities.ndim != 3:
            raise VolumeFormatError(f"{self.name}: volume must be 3-D, got shape {self.intensities.shape}")
        if self.intensities.shape != self.mask.shape:
            raise VolumeFormatError(
                f"{self.name}: mask dims {list(self.mask.shape)} differ from volume dims {list(self.intensities.shape)}"
            )
        if len(self.spacing) != 3 or min(self.spacing) <= 0:
            raise VolumeFormatError(f"{self.name}: spacing must be three positive values, got {self.spacing}")

    @property
    def voxel_volume_ml(self) -> float:
        """Volume of one voxel in mL"""
        return self.spacing[0] * self.spacing[1] * self.spacing[2] / 1000.0


@dataclass
class LesionRecord(DataClassJsonMixin):
    """
    One lesion of a mask. `bbox` is inclusive: (x0, x1, y0, y1, z0, z1).
    """

    lesion_id: str
    patient_id: str
    mask_id: int
    volume_ml: float
    voxel_count: int
    bbox: Tuple[int, int, int, int, int, int]
    label: Optional[str] = None


@dataclass
class PatchTriplet:
    """
    Principal-plane patch and two further planes stacked as (3, H, W) float32.
    """

    patches: numpy.ndarray
    lesion_id: str
    label: Optional[str] = None

    @property
    def size(self) -> Tuple[int, int]:
        """(H, W) of every patch"""
        return self.patches.shape[1], self.patches.shape[2]


@dataclass
class SplitManifest(DataClassJsonMixin):
    """
    Disjoint train / validation / test lesion id lists.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    seed: int
    strategy: str
    train: List[str] = field(default_factory=list)
    val: List[str] = field(default_factory=list)
    test: List[str] = field(default_factory=list)


@dataclass
class PatchConfig(DataClassJsonMixin):
    """
    Patch extraction settings.

    plane_mode "orthogonal" takes the two planes orthogonal to the principal plane through the lesion centroid,
    "adjacent" takes the principal-plane slices right before and after the selected one.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    target_size: Tuple[int, int] = PADDED_PATCH_SIZE
    plane_mode: str = "orthogonal"

    def __post_init__(self):
        self.target_size = tuple(self.target_size)
        if len(self.target_size) != 2 or min(self.target_size) < 1:
            raise ConfigError(f"target_size must be two positive integers, got {self.target_size}")
        if self.plane_mode not in PLANE_MODES:
            raise ConfigError(f"plane_mode must be one of {PLANE_MODES}, got '{self.plane_mode}'")


@dataclass
class AugmentationConfig(DataClassJsonMixin):
    """
    Train-time augmentation bounds.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    enabled: bool = True
    max_rotation_deg: float = 30.0
    max_shift_px: float = 25.0
    flip_probability: float = 0.5

    def __post_init__(self):
        if self.max_rotation_deg < 0 or self.max_shift_px < 0:
            raise ConfigError("Augmentation bounds must be non-negative")
        if not 0 <= self.flip_probability <= 1:
            raise ConfigError(f"flip_probability must be in [0, 1], got {self.flip_probability}")
