"""
 Module index.
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

from hepaclass.data._models import *
from hepaclass.data.volume_io import load_volume, save_volume
from hepaclass.data.manifest import DatasetManifestSchema, read_manifest, write_manifest
from hepaclass.data.lesions import (
    extract_lesions,
    select_principal_plane,
    centroid_voxel,
    extract_patch_triplet,
    crop_pad,
    normalize,
)
from hepaclass.data.splits import make_split
from hepaclass.data.augmentation import AugmentationParams, augment, draw_augmentation, apply_augmentation
from hepaclass.data.dataset import PatchDataset, BatchStream, prepare_dataset, load_prepared, resize_patches
