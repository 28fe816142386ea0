"""
 Pretext task for pretraining: lesion size instead of lesion type.
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

from typing import Optional

import numpy
import pandas

from hepaclass.data import PatchDataset
from hepaclass.exceptions import SplitError


def size_pretext_dataset(
    dataset: PatchDataset, lesions: pandas.DataFrame, threshold_ml: Optional[float] = None
) -> PatchDataset:
    """
      Relabels `dataset` for the lesion size task: class 1 for lesions larger than `threshold_ml`, class 0 otherwise.
      Patches are shared with `dataset`.

    :param dataset: Prepared patches.
    :param lesions: Lesion table with `lesion_id` and `volume_ml` columns, as written by prepare.
    :param threshold_ml: Size threshold, the median volume of the dataset lesions if not provided.
    :return: Dataset with size labels.
    """
    volumes = lesions.set_index("lesion_id")["volume_ml"].astype(float)
    missing = [lesion_id for lesion_id in dataset.lesion_ids if lesion_id not in volumes.index]
    if missing:
        raise SplitError(f"Lesion table has no volume for: {', '.join(sorted(missing))}")

    dataset_volumes = volumes.loc[dataset.lesion_ids].to_numpy()
    threshold = float(numpy.median(dataset_volumes)) if threshold_ml is None else threshold_ml

    return PatchDataset(
        patches=dataset.patches,
        labels=(dataset_volumes > threshold).astype(numpy.int64),
        lesion_ids=list(dataset.lesion_ids),
    )
