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

import numpy
import pandas
import pytest

from hepaclass.data import AugmentationConfig, PatchConfig, PatchDataset, BatchStream, load_prepared, prepare_dataset
from hepaclass.data.dataset import PATCH_ARCHIVE_FILE_NAME, SPLIT_FILE_NAME, LESIONS_FILE_NAME, resize_patches
from hepaclass.exceptions import SplitError

from tests.conftest import PreparedData, TEST_PATCH_SIZE


def test_prepared_dataset(prepared: PreparedData):
    dataset, split = prepared.dataset, prepared.split

    assert dataset.patches.shape == (20, 3, *TEST_PATCH_SIZE)
    assert dataset.patches.dtype == numpy.float32
    assert numpy.all(numpy.isfinite(dataset.patches))
    assert dataset.lesion_ids == sorted(dataset.lesion_ids)
    assert numpy.bincount(dataset.labels).tolist() == [10, 10]
    assert (len(split.train), len(split.val), len(split.test)) == (12, 4, 4)
    assert sorted(split.train + split.val + split.test) == dataset.lesion_ids


def test_prepared_files(prepared: PreparedData):
    dataset, split = load_prepared(prepared.path)
    lesions = pandas.read_csv(os.path.join(prepared.path, LESIONS_FILE_NAME))

    assert numpy.array_equal(dataset.patches, prepared.dataset.patches)
    assert numpy.array_equal(dataset.labels, prepared.dataset.labels)
    assert dataset.lesion_ids == prepared.dataset.lesion_ids
    assert split == prepared.split
    assert lesions["lesion_id"].tolist() == dataset.lesion_ids
    assert (lesions["volume_ml"] > 0).all()


def test_prepare_deterministic(prepared: PreparedData, phantom_dir: str, tmp_path):
    patch_config = PatchConfig(target_size=TEST_PATCH_SIZE)
    prepare_dataset(phantom_dir, str(tmp_path), seed=0, patch_config=patch_config, workers=1)

    for file_name in [PATCH_ARCHIVE_FILE_NAME, SPLIT_FILE_NAME, LESIONS_FILE_NAME]:
        with open(os.path.join(prepared.path, file_name), "rb") as first, open(tmp_path / file_name, "rb") as second:
            assert first.read() == second.read(), file_name


def test_subset(prepared: PreparedData):
    ids = list(reversed(prepared.split.test))
    subset = prepared.dataset.subset(ids)

    assert subset.lesion_ids == ids
    assert len(subset) == 4
    assert numpy.array_equal(subset.patches[0], prepared.dataset.patches[prepared.dataset.lesion_ids.index(ids[0])])

    with pytest.raises(SplitError):
        prepared.dataset.subset(["patient_9999-1"])


def test_resize_patches():
    patches = numpy.ones((2, 3, 8, 6), dtype=numpy.float32)

    assert resize_patches(patches, (8, 6)) is patches
    assert resize_patches(patches, (16, 12)).shape == (2, 3, 16, 12)
    assert numpy.allclose(resize_patches(patches, (5, 4)), 1.0)


def _stream_batches(dataset: PatchDataset, **kwargs):
    return list(BatchStream(dataset, batch_size=5, input_size=(24, 24), **kwargs))


def test_batch_stream_schedule(prepared: PreparedData):
    train = prepared.dataset.subset(prepared.split.train)
    shuffled = _stream_batches(train, seed=1, epoch=0)
    ordered = _stream_batches(train, shuffle=False)

    assert len(shuffled) == 2
    assert all(x.shape == (5, 3, 24, 24) and y.shape == (5,) for x, y in shuffled)
    assert [len(y) for _, y in ordered] == [5, 5, 2]
    assert numpy.array_equal(numpy.concatenate([y for _, y in ordered]), train.labels)


@pytest.mark.parametrize("augmentation", [None, AugmentationConfig()])
def test_batch_stream_deterministic(prepared: PreparedData, augmentation):
    dataset = prepared.dataset
    single = _stream_batches(dataset, seed=4, epoch=2, augmentation=augmentation, workers=1)
    threaded = _stream_batches(dataset, seed=4, epoch=2, augmentation=augmentation, workers=3)
    next_epoch = _stream_batches(dataset, seed=4, epoch=3, augmentation=augmentation, workers=1)

    assert len(single) == len(threaded) == 4
    for (x_single, y_single), (x_threaded, y_threaded) in zip(single, threaded):
        assert numpy.array_equal(x_single, x_threaded)
        assert numpy.array_equal(y_single, y_threaded)
    assert not all(numpy.array_equal(first[0], second[0]) for first, second in zip(single, next_epoch))


def test_batch_stream_early_exit(prepared: PreparedData):
    stream = iter(BatchStream(prepared.dataset, batch_size=2, input_size=TEST_PATCH_SIZE, workers=2))
    x, _ = next(stream)
    stream.close()

    assert x.shape == (2, 3, *TEST_PATCH_SIZE)
