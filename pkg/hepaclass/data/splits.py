"""
 Stratified train / validation / test splits.
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

from collections import Counter, defaultdict
from typing import List, Dict, Sequence

import numpy

from hepaclass.data._models import LesionRecord, SplitManifest, LABELS, SPLIT_STRATEGIES
from hepaclass.exceptions import SplitError

SPLIT_NAMES = ("train", "val", "test")

SPLIT_FRACTIONS = (0.6, 0.2)

MIN_SPLIT_RECORDS = 5


def split_sizes(count: int) -> Dict[str, int]:
    """
      Train / validation / test sizes of `count` items: 60 % and 20 % rounded half up, the rest to test.
    """
    train = int(SPLIT_FRACTIONS[0] * count + 0.5)
    val = int(SPLIT_FRACTIONS[1] * count + 0.5)
    return {"train": train, "val": val, "test": count - train - val}


def _by_label(records: Sequence[LesionRecord]) -> Dict[str, List[LesionRecord]]:
    groups = defaultdict(list)
    for record in records:
        if record.label not in LABELS:
            raise SplitError(f"Lesion {record.lesion_id} has no valid label: {record.label}")
        groups[record.label].append(record)

    return {label: sorted(groups[label], key=lambda record: record.lesion_id) for label in LABELS}


def _lesion_level(records: Sequence[LesionRecord], rng: numpy.random.Generator) -> Dict[str, List[str]]:
    splits = {name: [] for name in SPLIT_NAMES}
    for group in _by_label(records).values():
        order = [group[index].lesion_id for index in rng.permutation(len(group))]
        sizes = split_sizes(len(group))
        splits["train"].extend(order[: sizes["train"]])
        splits["val"].extend(order[sizes["train"] : sizes["train"] + sizes["val"]])
        splits["test"].extend(order[sizes["train"] + sizes["val"] :])

    return splits


def _patient_level(records: Sequence[LesionRecord], rng: numpy.random.Generator) -> Dict[str, List[str]]:
    targets = {name: Counter() for name in SPLIT_NAMES}
    for label, group in _by_label(records).items():
        for name, size in split_sizes(len(group)).items():
            targets[name][label] = size

    patients = defaultdict(list)
    for record in sorted(records, key=lambda record: record.lesion_id):
        patients[record.patient_id].append(record)

    patient_ids = sorted(patients)
    shuffled = [patient_ids[index] for index in rng.permutation(len(patient_ids))]
    # larger patients first, shuffled order among equals
    shuffled.sort(key=lambda patient_id: -len(patients[patient_id]))

    assigned = {name: Counter() for name in SPLIT_NAMES}
    splits = {name: [] for name in SPLIT_NAMES}
    for patient_id in shuffled:
        counts = Counter(record.label for record in patients[patient_id])
        deficits = [
            sum(count * (targets[name][label] - assigned[name][label]) for label, count in counts.items())
            for name in SPLIT_NAMES
        ]
        chosen = SPLIT_NAMES[int(numpy.argmax(deficits))]
        assigned[chosen].update(counts)
        splits[chosen].extend(record.lesion_id for record in patients[patient_id])

    return splits


def make_split(records: Sequence[LesionRecord], seed: int, strategy: str = "lesion_level") -> SplitManifest:
    """
      60/20/20 split stratified by label. `lesion_level` assigns lesions independently, `patient_level`
      keeps every patient's lesions in one split, greedily filling the split with the largest class deficit.

    :param records: Labelled lesion records.
    :param seed: Shuffle seed.
    :param strategy: lesion_level or patient_level.
    :return: SplitManifest with sorted id lists.
    :raises SplitError: for fewer than 5 records, unlabelled records, duplicate ids or unknown strategies.
    """
    if strategy not in SPLIT_STRATEGIES:
        raise SplitError(f"Unknown split strategy '{strategy}', expected one of {SPLIT_STRATEGIES}")
    if len(records) < MIN_SPLIT_RECORDS:
        raise SplitError(f"At least {MIN_SPLIT_RECORDS} lesions are required to split, got {len(records)}")
    if len({record.lesion_id for record in records}) != len(records):
        raise SplitError("Lesion ids must be unique")

    rng = numpy.random.default_rng(seed)
    splits = _lesion_level(records, rng) if strategy == "lesion_level" else _patient_level(records, rng)

    return SplitManifest(seed=seed, strategy=strategy, **{name: sorted(ids) for name, ids in splits.items()})
