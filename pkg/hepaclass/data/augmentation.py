"""
 Train-time augmentation: rotation, shift and flips shared by the three patches of a triplet.
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

from dataclasses import dataclass, replace
from typing import Tuple, Optional

import numpy
from scipy import ndimage

from hepaclass.data._models import PatchTriplet, AugmentationConfig


@dataclass(frozen=True)
class AugmentationParams:
    """
    One drawn transform. `shift` is (rows, columns) in pixels; `flip_horizontal` mirrors columns,
    `flip_vertical` mirrors rows.
    """

    angle_deg: float = 0.0
    shift: Tuple[float, float] = (0.0, 0.0)
    flip_horizontal: bool = False
    flip_vertical: bool = False


def draw_augmentation(rng: numpy.random.Generator, cfg: Optional[AugmentationConfig] = None) -> AugmentationParams:
    """
      Draws angle ~ U(-max_rotation, max_rotation), shifts ~ U(-max_shift, max_shift) per axis
      and each flip with `flip_probability`.
    """
    cfg = cfg or AugmentationConfig()
    angle = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg)
    shift = rng.uniform(-cfg.max_shift_px, cfg.max_shift_px, size=2)
    flips = rng.random(2) < cfg.flip_probability

    return AugmentationParams(
        angle_deg=float(angle),
        shift=(float(shift[0]), float(shift[1])),
        flip_horizontal=bool(flips[0]),
        flip_vertical=bool(flips[1]),
    )


def _rotate_shift(patch: numpy.ndarray, angle_deg: float, shift: Tuple[float, float]) -> numpy.ndarray:
    if angle_deg == 0 and shift[0] == 0 and shift[1] == 0:
        return patch

    theta = numpy.deg2rad(angle_deg)
    # output -> input coordinates: inverse rotation about the patch center after removing the shift
    inverse = numpy.array([[numpy.cos(theta), numpy.sin(theta)], [-numpy.sin(theta), numpy.cos(theta)]])
    center = (numpy.array(patch.shape, dtype=numpy.float64) - 1) / 2
    offset = center - inverse @ (center + numpy.asarray(shift, dtype=numpy.float64))

    return ndimage.affine_transform(
        patch.astype(numpy.float64),
        inverse,
        offset=offset,
        order=1,
        mode="constant",
        cval=float(patch.mean(dtype=numpy.float64)),
    ).astype(patch.dtype)


def apply_augmentation(patches: numpy.ndarray, params: AugmentationParams) -> numpy.ndarray:
    """
      Applies one transform to every patch of a (3, H, W) stack: bilinear rotation about the center and shift,
      out-of-frame pixels filled with each patch's mean, then flips.
    """
    out = []
    for patch in patches:
        transformed = _rotate_shift(patch, params.angle_deg, params.shift)
        if params.flip_horizontal:
            transformed = transformed[:, ::-1]
        if params.flip_vertical:
            transformed = transformed[::-1, :]
        out.append(transformed)

    return numpy.ascontiguousarray(numpy.stack(out))


def augment(
    triplet: PatchTriplet, rng: numpy.random.Generator, cfg: Optional[AugmentationConfig] = None
) -> PatchTriplet:
    """
      Draws a transform from `rng` and applies it to all three patches.
    """
    return replace(triplet, patches=apply_augmentation(triplet.patches, draw_augmentation(rng, cfg)))
