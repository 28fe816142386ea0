"""
 Lesion records, principal planes and patch triplets.
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

from typing import List, Tuple, Optional, Dict

import numpy
from scipy import ndimage

from hepaclass.data._models import VolumeWithMask, LesionRecord, PatchTriplet, PatchConfig, PADDED_PATCH_SIZE
from hepaclass.exceptions import LesionExtractionError

NORMALIZATION_STD_FLOOR = 1e-6


def lesion_id_for(volume_id: str, mask_id: int) -> str:
    """`<volume id>-<mask id>`"""
    return f"{volume_id}-{mask_id}"


def extract_lesions(
    vm: VolumeWithMask,
    patient_id: Optional[str] = None,
    labels: Optional[Dict[int, str]] = None,
    volume_id: Optional[str] = None,
) -> List[LesionRecord]:
    """
      One record per distinct non-zero mask id, ordered by id, with a tight inclusive bounding box
      and the physical lesion volume.

    :param vm: Volume and mask.
    :param patient_id: Patient id of all records, `vm.name` if not provided.
    :param labels: Optional label per mask id.
    :param volume_id: Prefix of lesion ids, `vm.name` if not provided.
    :return: Lesion records.
    :raises LesionExtractionError: if the mask has no lesion voxels.
    """
    mask = numpy.asarray(vm.mask, dtype=numpy.int64)
    if mask.min() < 0:
        raise LesionExtractionError(f"{vm.name}: mask has negative ids")

    counts = numpy.bincount(mask.ravel())
    if counts.size < 2 or not counts[1:].any():
        raise LesionExtractionError(f"{vm.name}: mask contains no lesions")

    records = []
    for index, bounds in enumerate(ndimage.find_objects(mask)):
        if bounds is None:
            continue
        mask_id = index + 1
        records.append(
            LesionRecord(
                lesion_id=lesion_id_for(volume_id or vm.name, mask_id),
                patient_id=patient_id or vm.name,
                mask_id=mask_id,
                volume_ml=float(counts[mask_id]) * vm.voxel_volume_ml,
                voxel_count=int(counts[mask_id]),
                bbox=tuple(value for axis_slice in bounds for value in (axis_slice.start, axis_slice.stop - 1)),
                label=(labels or {}).get(mask_id),
            )
        )

    return records


def bbox_slices(bbox: Tuple[int, ...]) -> Tuple[slice, slice, slice]:
    """
    Slices of an inclusive (x0, x1, y0, y1, z0, z1) bounding box.
    """
    return tuple(slice(bbox[2 * axis], bbox[2 * axis + 1] + 1) for axis in range(3))


def select_principal_plane(mask_crop: numpy.ndarray) -> Tuple[int, int]:
    """
      The (axis, slice index) whose slice holds the most lesion voxels. Ties go to the lowest axis,
      then the lowest index.

    :param mask_crop: 3-D lesion mask crop, non-zero inside the lesion.
    :return: (axis, index) relative to the crop.
    """
    lesion = numpy.asarray(mask_crop) != 0
    best_axis, best_index, best_count = 0, 0, -1
    for axis in range(3):
        per_slice = lesion.sum(axis=tuple(other for other in range(3) if other != axis))
        index = int(numpy.argmax(per_slice))
        if per_slice[index] > best_count:
            best_axis, best_index, best_count = axis, index, int(per_slice[index])

    return best_axis, best_index


def centroid_voxel(mask_crop: numpy.ndarray) -> Tuple[int, int, int]:
    """
      Mean lesion voxel coordinate, rounded half up to the nearest voxel.
    """
    coordinates = numpy.argwhere(numpy.asarray(mask_crop) != 0)
    if coordinates.size == 0:
        raise LesionExtractionError("Cannot compute the centroid of an empty mask")

    return tuple(int(value) for value in numpy.floor(coordinates.mean(axis=0) + 0.5))


def raw_triplet(vm: VolumeWithMask, record: LesionRecord, plane_mode: str = "orthogonal") -> List[numpy.ndarray]:
    """
      Bounding-box intensity crops of the principal plane and two further planes, before padding.
      Every plane keeps its remaining axes in increasing order.

    :param vm: Volume and mask.
    :param record: Lesion to crop.
    :param plane_mode: "orthogonal" (planes through the centroid) or "adjacent" (neighbouring principal slices).
    :return: Three 2-D float32 arrays.
    :raises LesionExtractionError: if a plane contains no lesion voxels.
    """
    bounds = bbox_slices(record.bbox)
    lesion = vm.mask[bounds] == record.mask_id
    intensities = vm.intensities[bounds].astype(numpy.float32)
    if not lesion.any():
        raise LesionExtractionError(f"{record.lesion_id}: no voxels with mask id {record.mask_id} in its bounding box")

    axis, index = select_principal_plane(lesion)
    if plane_mode == "adjacent":
        last = lesion.shape[axis] - 1
        planes = [(axis, index), (axis, max(index - 1, 0)), (axis, min(index + 1, last))]
    else:
        centroid = centroid_voxel(lesion)
        planes = [(axis, index)] + [(other, centroid[other]) for other in range(3) if other != axis]

    patches = []
    for plane_axis, plane_index in planes:
        if not numpy.take(lesion, plane_index, axis=plane_axis).any():
            raise LesionExtractionError(
                f"{record.lesion_id}: plane {plane_index} of axis {plane_axis} contains no lesion voxels"
            )
        patches.append(numpy.take(intensities, plane_index, axis=plane_axis))

    return patches


def crop_pad(patch: numpy.ndarray, target: Tuple[int, int] = PADDED_PATCH_SIZE) -> numpy.ndarray:
    """
      Centers a 2-D patch on a `target` canvas filled with the mean of the whole input patch. Dimensions
      larger than the target are center-cropped after the fill value is taken.

    :param patch: 2-D array.
    :param target: (H, W) of the output.
    :return: float32 array of shape `target`.
    """
    patch = numpy.asarray(patch, dtype=numpy.float32)
    fill = float(patch.mean(dtype=numpy.float64))

    starts = [max((size - limit) // 2, 0) for size, limit in zip(patch.shape, target)]
    patch = patch[starts[0] : starts[0] + target[0], starts[1] : starts[1] + target[1]]

    top, left = ((limit - size) // 2 for size, limit in zip(patch.shape, target))
    canvas = numpy.full(target, fill, dtype=numpy.float32)
    canvas[top : top + patch.shape[0], left : left + patch.shape[1]] = patch
    return canvas


def normalize(patch: numpy.ndarray) -> numpy.ndarray:
    """
      (x - mean) / max(std, 1e-6) over the whole patch.
    """
    values = numpy.asarray(patch, dtype=numpy.float64)
    return ((values - values.mean()) / max(values.std(), NORMALIZATION_STD_FLOOR)).astype(numpy.float32)


def extract_patch_triplet(
    vm: VolumeWithMask, record: LesionRecord, patch_config: Optional[PatchConfig] = None
) -> PatchTriplet:
    """
      Cropped, padded and normalized patch triplet of one lesion.

    :param vm: Volume and mask.
    :param record: Lesion to extract.
    :param patch_config: Target size and plane mode.
    :return: PatchTriplet with patches of shape (3, *target_size).
    """
    patch_config = patch_config or PatchConfig()
    patches = [
        normalize(crop_pad(patch, patch_config.target_size))
        for patch in raw_triplet(vm, record, patch_config.plane_mode)
    ]
    return PatchTriplet(patches=numpy.stack(patches), lesion_id=record.lesion_id, label=record.label)
