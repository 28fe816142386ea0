"""
 Deterministic synthetic CT phantom generator.
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
from dataclasses import dataclass
from typing import List, Tuple, Optional

import numpy
import pandas
from scipy import ndimage

from hepaclass.data import LABELS, save_volume, write_manifest
from hepaclass.data.lesions import lesion_id_for
from hepaclass.data.manifest import manifest_path
from hepaclass.logs import SemanticLogger
from hepaclass.phantom._models import PhantomSpec
from hepaclass.utils import derive_rng, run_time_logged

VOLUMES_DIR = "volumes"
MASKS_DIR = "masks"

# random streams under the phantom seed
_LABEL_STREAM = 0
_SHAPE_STREAM = 1
_BACKGROUND_STREAM = 2
_TEXTURE_STREAM = 3

TEXTURE_SMOOTHING_VOXELS = 1.5
RIM_NOISE_HU = 10.0


@dataclass
class PhantomLesion:
    """
    A drawn lesion before placement: label, target volume and ellipsoid semi-axes in voxels.
    """

    index: int
    label: str
    volume_ml: float
    semi_axes: numpy.ndarray


def lognormal_volume(rng: numpy.random.Generator, mean_ml: float, sigma: float, low: float, high: float) -> float:
    """
      Log-normal draw with mean `mean_ml` before clipping to [low, high].
    """
    mu = numpy.log(mean_ml) - sigma**2 / 2
    return float(numpy.clip(rng.lognormal(mu, sigma), low, high))


def draw_lesions(spec: PhantomSpec) -> List[PhantomLesion]:
    """
      Balanced labels in random order, with volumes and ellipsoid shapes for every lesion.
    """
    cysts = (spec.n_lesions + 1) // 2
    labels = derive_rng(spec.seed, _LABEL_STREAM).permutation(
        [LABELS[0]] * cysts + [LABELS[1]] * (spec.n_lesions - cysts)
    )

    lesions = []
    for index, label in enumerate(labels.tolist()):
        rng = derive_rng(spec.seed, _SHAPE_STREAM, index)
        mean_ml = spec.cyst_mean_ml if label == LABELS[0] else spec.metastasis_mean_ml
        volume_ml = lognormal_volume(rng, mean_ml, spec.volume_sigma, spec.volume_min_ml, spec.volume_max_ml)

        ratios = rng.uniform(0.7, 1.3, size=3)
        ratios /= numpy.cbrt(numpy.prod(ratios))
        radius_mm = numpy.cbrt(volume_ml * 1000.0 * 3.0 / (4.0 * numpy.pi))
        lesions.append(
            PhantomLesion(
                index=index,
                label=label,
                volume_ml=volume_ml,
                semi_axes=radius_mm * ratios / numpy.asarray(spec.spacing),
            )
        )

    return lesions


def group_lesions(lesions: List[PhantomLesion], spec: PhantomSpec) -> List[List[PhantomLesion]]:
    """
      Splits lesions into consecutive groups of 1..max_lesions_per_volume, one group per patient volume.
    """
    rng = derive_rng(spec.seed, _LABEL_STREAM, 1)
    groups, position = [], 0
    while position < len(lesions):
        size = int(rng.integers(1, spec.max_lesions_per_volume + 1))
        groups.append(lesions[position : position + size])
        position += size

    return groups


def ellipsoid_mask(semi_axes: numpy.ndarray) -> numpy.ndarray:
    """
      Boolean voxel ellipsoid centered in a box of odd side lengths. The center voxel is always set.
    """
    half = numpy.ceil(semi_axes).astype(int)
    grid = numpy.ogrid[tuple(slice(-size, size + 1) for size in half)]
    distance = sum((offset / axis) ** 2 for offset, axis in zip(grid, semi_axes))
    mask = distance <= 1.0
    mask[tuple(half)] = True
    return mask


def lesion_intensities(
    mask: numpy.ndarray, label: str, rng: numpy.random.Generator, spec: PhantomSpec
) -> numpy.ndarray:
    """
      HU values over the lesion box. Cysts are homogeneous and hypodense; metastases have a smooth
      multi-blob core texture and a denser one-voxel rim.
    """
    if label == LABELS[0]:
        return spec.cyst_hu + rng.normal(0.0, spec.cyst_noise_hu, size=mask.shape)

    texture = ndimage.gaussian_filter(rng.normal(size=mask.shape), sigma=TEXTURE_SMOOTHING_VOXELS)
    texture *= spec.metastasis_texture_hu / max(float(texture.std()), 1e-12)
    core = spec.metastasis_core_hu + texture
    rim = mask & ~ndimage.binary_erosion(mask)
    return numpy.where(rim, spec.metastasis_rim_hu + rng.normal(0.0, RIM_NOISE_HU, size=mask.shape), core)


def render_volume(
    lesions: List[PhantomLesion], volume_index: int, spec: PhantomSpec
) -> Tuple[numpy.ndarray, numpy.ndarray]:
    """
      Places lesions side by side along x in a noisy liver background.

    :return: int16 intensities and uint16 mask, mask id k for the k-th lesion of the group.
    """
    boxes = [ellipsoid_mask(lesion.semi_axes) for lesion in lesions]
    margin = spec.margin_voxels
    dims = (
        margin + sum(box.shape[0] + margin for box in boxes),
        max(box.shape[1] for box in boxes) + 2 * margin,
        max(box.shape[2] for box in boxes) + 2 * margin,
    )

    rng = derive_rng(spec.seed, _BACKGROUND_STREAM, volume_index)
    intensities = spec.liver_hu + rng.normal(0.0, spec.liver_noise_hu, size=dims)
    mask = numpy.zeros(dims, dtype=numpy.uint16)

    start_x = margin
    for mask_id, (lesion, box) in enumerate(zip(lesions, boxes), start=1):
        start_y = (dims[1] - box.shape[1]) // 2
        start_z = (dims[2] - box.shape[2]) // 2
        region = (
            slice(start_x, start_x + box.shape[0]),
            slice(start_y, start_y + box.shape[1]),
            slice(start_z, start_z + box.shape[2]),
        )
        values = lesion_intensities(box, lesion.label, derive_rng(spec.seed, _TEXTURE_STREAM, lesion.index), spec)
        intensities[region][box] = values[box]
        mask[region][box] = mask_id
        start_x += box.shape[0] + margin

    info = numpy.iinfo(numpy.int16)
    return numpy.clip(numpy.round(intensities), info.min, info.max).astype(numpy.int16), mask


@run_time_logged("gen-phantom")
def generate(spec: PhantomSpec, out_dir: str, logger: Optional[SemanticLogger] = None) -> str:
    """
      Writes a phantom dataset: `volumes/<patient>.json|.raw`, `masks/<patient>.json|.raw` and `manifest.csv`.
      Output bytes depend only on `spec`.

    :param spec: Phantom settings.
    :param out_dir: Dataset directory, created if missing.
    :param logger: Optional logger.
    :return: Manifest path.
    """
    groups = group_lesions(draw_lesions(spec), spec)
    rows = []
    for volume_index, group in enumerate(groups):
        name = f"patient_{volume_index:04d}"
        intensities, mask = render_volume(group, volume_index, spec)
        save_volume(intensities, spec.spacing, os.path.join(out_dir, VOLUMES_DIR, name))
        save_volume(mask, spec.spacing, os.path.join(out_dir, MASKS_DIR, name))
        rows.extend(
            {
                "lesion_id": lesion_id_for(name, mask_id),
                "patient_id": name,
                "volume_path": f"{VOLUMES_DIR}/{name}.json",
                "mask_path": f"{MASKS_DIR}/{name}.json",
                "label": lesion.label,
            }
            for mask_id, lesion in enumerate(group, start=1)
        )

    path = manifest_path(out_dir)
    write_manifest(pandas.DataFrame(rows), path)
    if logger:
        logger.info(
            "Generated {lesions} phantom lesions in {volumes} volumes under {out_dir}",
            lesions=len(rows),
            volumes=len(groups),
            out_dir=out_dir,
        )

    return path
