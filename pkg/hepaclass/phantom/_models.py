"""
 Synthetic phantom settings.
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

from dataclasses import dataclass
from typing import Tuple

from dataclasses_json import DataClassJsonMixin, Undefined, config

from hepaclass.exceptions import ConfigError


@dataclass
class PhantomSpec(DataClassJsonMixin):
    """
    Synthetic liver lesion dataset. Lesion volumes are log-normal with the given means, clipped to
    [volume_min_ml, volume_max_ml]. All intensities are in HU.
    """

    dataclass_json_config = config(undefined=Undefined.RAISE)["dataclasses_json"]

    n_lesions: int = 230
    seed: int = 0
    cyst_mean_ml: float = 0.791
    metastasis_mean_ml: float = 24.871
    volume_sigma: float = 1.0
    volume_min_ml: float = 0.018
    volume_max_ml: float = 534.6
    spacing: Tuple[float, float, float] = (1.5, 1.5, 1.5)
    max_lesions_per_volume: int = 3
    margin_voxels: int = 6
    liver_hu: float = 100.0
    liver_noise_hu: float = 15.0
    cyst_hu: float = 0.0
    cyst_noise_hu: float = 10.0
    metastasis_core_hu: float = 40.0
    metastasis_texture_hu: float = 25.0
    metastasis_rim_hu: float = 80.0

    def __post_init__(self):
        self.spacing = tuple(self.spacing)
        if self.n_lesions < 1:
            raise ConfigError(f"n_lesions must be positive, got {self.n_lesions}")
        if len(self.spacing) != 3 or min(self.spacing) <= 0:
            raise ConfigError(f"spacing must be three positive numbers, got {self.spacing}")
        if not 0 < self.volume_min_ml < self.volume_max_ml:
            raise ConfigError(
                f"volume clip range must satisfy 0 < min < max, got [{self.volume_min_ml}, {self.volume_max_ml}]"
            )
        if self.cyst_mean_ml <= 0 or self.metastasis_mean_ml <= 0 or self.volume_sigma < 0:
            raise ConfigError("Mean lesion volumes must be positive and volume_sigma non-negative")
        if self.max_lesions_per_volume < 1 or self.margin_voxels < 1:
            raise ConfigError("max_lesions_per_volume and margin_voxels must be positive")
