"""
 Color-coded lesion overlays on CT slices.
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

from typing import Mapping, Union, List

import numpy

from hepaclass.data import VolumeWithMask, LABELS, label_index
from hepaclass.data.manifest import mask_id_of
from hepaclass.exceptions import OverlayError, ManifestError, ConfigError
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import PpmImageSerializationFormat

WINDOW_LEVEL_HU = 60.0
WINDOW_WIDTH_HU = 400.0
TINT_ALPHA = 0.5

# RGB per class index: cyst green, metastasis red
CLASS_COLORS = numpy.array([[0, 255, 0], [255, 0, 0]], dtype=numpy.float64)


def window_level(
    intensities: numpy.ndarray, level: float = WINDOW_LEVEL_HU, width: float = WINDOW_WIDTH_HU
) -> numpy.ndarray:
    """
      Maps HU values to 0..255 gray levels, clipping outside [level - width / 2, level + width / 2].
    """
    low = level - width / 2
    scaled = (numpy.asarray(intensities, dtype=numpy.float64) - low) / width * 255.0
    return numpy.clip(numpy.round(scaled), 0, 255).astype(numpy.uint8)


def _class_of(prediction: Union[int, str]) -> int:
    if isinstance(prediction, str):
        try:
            return label_index(prediction)
        except ConfigError as error:
            raise OverlayError(str(error)) from error
    if int(prediction) not in range(len(LABELS)):
        raise OverlayError(f"Unknown class index {prediction}")
    return int(prediction)


def render_overlay(
    vm: VolumeWithMask, predictions: Mapping[str, Union[int, str]], slice_index: int, axis: int = 2
) -> numpy.ndarray:
    """
      Window-leveled grayscale slice with the voxels of every predicted lesion blended 50% towards
      green (cyst) or red (metastasis). Lesions without a prediction stay gray.

    :param vm: Volume and mask.
    :param predictions: Class index or label by lesion id (`<volume id>-<mask id>`).
    :param slice_index: Slice position along `axis`.
    :param axis: Slicing axis, 2 (axial) by default.
    :return: (H, W, 3) uint8 image with the slice dimensions.
    :raises OverlayError: for slices outside the volume, lesion ids of other volumes or absent from the mask.
    """
    if axis not in (0, 1, 2) or not 0 <= slice_index < vm.intensities.shape[axis]:
        raise OverlayError(
            f"Slice {slice_index} on axis {axis} is outside volume '{vm.name}' of dims {vm.intensities.shape}"
        )

    gray = numpy.repeat(window_level(numpy.take(vm.intensities, slice_index, axis=axis))[..., None], 3, axis=-1)
    mask = numpy.take(vm.mask, slice_index, axis=axis)
    present = set(numpy.unique(vm.mask).tolist()) - {0}

    image = gray.astype(numpy.float64)
    for lesion_id, prediction in sorted(predictions.items()):
        try:
            mask_id = mask_id_of(lesion_id)
        except ManifestError as error:
            raise OverlayError(str(error)) from error
        if lesion_id.rpartition("-")[0] != vm.name:
            raise OverlayError(f"Lesion '{lesion_id}' belongs to another volume than '{vm.name}'")
        if mask_id not in present:
            raise OverlayError(f"Lesion '{lesion_id}' is not in the mask of volume '{vm.name}'")

        pixels = mask == mask_id
        image[pixels] = (1 - TINT_ALPHA) * image[pixels] + TINT_ALPHA * CLASS_COLORS[_class_of(prediction)]

    return numpy.round(image).astype(numpy.uint8)


def lesion_slices(vm: VolumeWithMask, axis: int = 2) -> List[int]:
    """Slice positions along `axis` containing lesion voxels"""
    other_axes = tuple(dim for dim in range(3) if dim != axis)
    return numpy.flatnonzero((vm.mask > 0).any(axis=other_axes)).tolist()


def save_overlay(image: numpy.ndarray, path: str) -> None:
    """
      Writes an overlay as a binary PPM.
    """
    LocalStorage().save_data_as_blob(image, path, PpmImageSerializationFormat)
