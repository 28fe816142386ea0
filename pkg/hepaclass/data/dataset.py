"""
 Prepared patch datasets and batch streaming.
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
import queue
import threading
from concurrent.futures import ThreadPoolExecutor, Future
from dataclasses import dataclass
from typing import List, Optional, Tuple, Iterator, Sequence, Dict

import numpy
import pandas
from scipy import ndimage

from hepaclass.data._models import (
    PatchConfig,
    AugmentationConfig,
    SplitManifest,
    LesionRecord,
    PatchTriplet,
    label_index,
)
from hepaclass.data.augmentation import draw_augmentation, apply_augmentation
from hepaclass.data.lesions import extract_lesions, extract_patch_triplet
from hepaclass.data.manifest import read_manifest, mask_id_of
from hepaclass.data.splits import make_split
from hepaclass.data.volume_io import load_volume
from hepaclass.exceptions import LesionExtractionError, SplitError
from hepaclass.logs import SemanticLogger
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import (
    PatchArchiveSerializationFormat,
    DictJsonSerializationFormat,
    DataFrameCsvSerializationFormat,
)
from hepaclass.utils import chunk_list, derive_rng, run_time_logged, default_worker_count
from hepaclass.utils.concurrent_task_runner import ConcurrentTaskRunner, Executable

PATCH_ARCHIVE_FILE_NAME = "patches.npz"
SPLIT_FILE_NAME = "split.json"
LESIONS_FILE_NAME = "lesions.csv"

UNLABELLED = -1


@dataclass
class PatchDataset:
    """
    Padded and normalized patch triplets, (N, 3, H, W) float32, with int labels (-1 when unknown).
    """

    patches: numpy.ndarray
    labels: numpy.ndarray
    lesion_ids: List[str]

    def __len__(self) -> int:
        return len(self.lesion_ids)

    @classmethod
    def from_triplets(cls, triplets: Sequence[PatchTriplet]) -> "PatchDataset":
        """
        Stacks triplets in the given order.
        """
        return cls(
            patches=numpy.stack([triplet.patches for triplet in triplets]).astype(numpy.float32),
            labels=numpy.array(
                [label_index(triplet.label) if triplet.label else UNLABELLED for triplet in triplets], dtype=numpy.int64
            ),
            lesion_ids=[triplet.lesion_id for triplet in triplets],
        )

    def subset(self, lesion_ids: Sequence[str]) -> "PatchDataset":
        """
          Rows of `lesion_ids`, in that order.

        :raises SplitError: for ids not in this dataset.
        """
        positions = {lesion_id: position for position, lesion_id in enumerate(self.lesion_ids)}
        missing = [lesion_id for lesion_id in lesion_ids if lesion_id not in positions]
        if missing:
            raise SplitError(f"Lesions not in the prepared dataset: {', '.join(sorted(missing))}")

        rows = numpy.array([positions[lesion_id] for lesion_id in lesion_ids], dtype=numpy.int64)
        return PatchDataset(
            patches=self.patches[rows],
            labels=self.labels[rows],
            lesion_ids=list(lesion_ids),
        )

    def to_archive(self) -> Dict[str, numpy.ndarray]:
        """Arrays for PatchArchiveSerializationFormat"""
        return {
            "patches": self.patches,
            "labels": self.labels,
            "lesion_ids": numpy.array(self.lesion_ids, dtype=str),
        }

    @classmethod
    def from_archive(cls, arrays: Dict[str, numpy.ndarray]) -> "PatchDataset":
        """Inverse of to_archive"""
        return cls(
            patches=arrays["patches"].astype(numpy.float32),
            labels=arrays["labels"].astype(numpy.int64),
            lesion_ids=[str(value) for value in arrays["lesion_ids"]],
        )


def resize_patches(patches: numpy.ndarray, size: Tuple[int, int]) -> numpy.ndarray:
    """
      Bilinear resize of the last two axes of a (..., H, W) array to `size`.
    """
    if tuple(patches.shape[-2:]) == tuple(size):
        return patches.astype(numpy.float32, copy=False)

    factors = [1.0] * (patches.ndim - 2) + [size[0] / patches.shape[-2], size[1] / patches.shape[-1]]
    resized = ndimage.zoom(patches.astype(numpy.float64), factors, order=1, mode="nearest")
    assert tuple(resized.shape[-2:]) == tuple(size), f"zoom produced {resized.shape}, expected {size}"
    return resized.astype(numpy.float32)


def _triplets_for_volume(
    rows: pandas.DataFrame, patch_config: PatchConfig, workers: Optional[int]
) -> Tuple[List[LesionRecord], List[PatchTriplet]]:
    first = rows.iloc[0]
    vm = load_volume(first["volume_path"], first["mask_path"])
    wanted = {mask_id_of(row["lesion_id"]): row for _, row in rows.iterrows()}

    by_mask_id = {record.mask_id: record for record in extract_lesions(vm, patient_id=str(first["patient_id"]))}
    missing = sorted(set(wanted) - set(by_mask_id))
    if missing:
        raise LesionExtractionError(f"{first['mask_path']}: mask ids {missing} listed in the manifest are absent")

    records = []
    for mask_id, row in wanted.items():
        record = by_mask_id[mask_id]
        record.lesion_id = row["lesion_id"]
        record.patient_id = row["patient_id"]
        record.label = row["label"]
        records.append(record)

    triplets = ConcurrentTaskRunner(
        [
            Executable(func=extract_patch_triplet, args=[vm, record, patch_config], alias=record.lesion_id)
            for record in records
        ],
        num_threads=workers,
    ).eager()

    return records, [triplets[record.lesion_id] for record in records]


@run_time_logged("prepare")
def prepare_dataset(
    data_dir: str,
    out_dir: str,
    seed: int,
    strategy: str = "lesion_level",
    patch_config: Optional[PatchConfig] = None,
    workers: Optional[int] = None,
    logger: Optional[SemanticLogger] = None,
) -> Tuple[PatchDataset, SplitManifest]:
    """
      Extracts padded, normalized patch triplets of every manifest lesion and splits them.
      Writes `patches.npz`, `split.json` and `lesions.csv` to `out_dir`.

    :param data_dir: Dataset directory with `manifest.csv`, or the manifest itself.
    :param out_dir: Output directory.
    :param seed: Split seed.
    :param strategy: lesion_level or patient_level.
    :param patch_config: Target size and plane mode.
    :param workers: Threads for per-lesion extraction.
    :param logger: Optional logger.
    :return: The prepared dataset and its split.
    """
    patch_config = patch_config or PatchConfig()
    manifest = read_manifest(data_dir)

    records: List[LesionRecord] = []
    triplets: List[PatchTriplet] = []
    for _, rows in manifest.groupby(["volume_path", "mask_path"], sort=True):
        volume_records, volume_triplets = _triplets_for_volume(rows, patch_config, workers)
        records.extend(volume_records)
        triplets.extend(volume_triplets)
        if logger:
            logger.debug(
                "Extracted {count} lesions from {volume}",
                count=len(volume_records),
                volume=rows.iloc[0]["volume_path"],
            )

    order = numpy.argsort([record.lesion_id for record in records], kind="stable")
    records = [records[index] for index in order]
    dataset = PatchDataset.from_triplets([triplets[index] for index in order])
    split = make_split(records, seed, strategy)

    storage = LocalStorage()
    storage.save_data_as_blob(
        dataset.to_archive(), os.path.join(out_dir, PATCH_ARCHIVE_FILE_NAME), PatchArchiveSerializationFormat
    )
    storage.save_data_as_blob(split.to_dict(), os.path.join(out_dir, SPLIT_FILE_NAME), DictJsonSerializationFormat)
    storage.save_data_as_blob(
        pandas.DataFrame([record.to_dict() for record in records]),
        os.path.join(out_dir, LESIONS_FILE_NAME),
        DataFrameCsvSerializationFormat,
    )

    if logger:
        logger.info(
            "Prepared {lesions} lesions: train {train}, val {val}, test {test}",
            lesions=len(dataset),
            train=len(split.train),
            val=len(split.val),
            test=len(split.test),
        )

    return dataset, split


def load_prepared(prepared_dir: str) -> Tuple[PatchDataset, SplitManifest]:
    """
      Reads the outputs of prepare_dataset.
    """
    storage = LocalStorage()
    dataset = PatchDataset.from_archive(
        storage.read_blob(os.path.join(prepared_dir, PATCH_ARCHIVE_FILE_NAME), PatchArchiveSerializationFormat)
    )
    split = SplitManifest.from_dict(
        storage.read_blob(os.path.join(prepared_dir, SPLIT_FILE_NAME), DictJsonSerializationFormat)
    )
    return dataset, split


class BatchStream:
    """
     Batches of (x, y) for one epoch: x is (B, 3, *input_size) float32, y is (B,) int64.

     With shuffling, the epoch order comes from (seed, epoch) and the trailing partial batch is dropped.
     Every batch draws its augmentations from (seed, epoch, batch index), so the stream does not depend
     on the number of workers. Workers build batches ahead of the consumer through a bounded queue.

    :param dataset: Prepared patches.
    :param batch_size: Batch size.
    :param input_size: Model input (H, W); patches are resized after augmentation.
    :param seed: Stream seed.
    :param epoch: Epoch number.
    :param augmentation: Augmentation settings, None or disabled for no augmentation.
    :param shuffle: Shuffle and drop the trailing partial batch (training) or keep order and all rows.
    :param workers: Batch builder threads, 1 builds batches on the consumer thread.
    """

    def __init__(
        self,
        dataset: PatchDataset,
        batch_size: int,
        input_size: Tuple[int, int],
        seed: int = 0,
        epoch: int = 0,
        augmentation: Optional[AugmentationConfig] = None,
        shuffle: bool = True,
        workers: Optional[int] = None,
    ):
        self._dataset = dataset
        self._input_size = tuple(input_size)
        self._seed = seed
        self._epoch = epoch
        self._augmentation = augmentation if augmentation and augmentation.enabled else None
        self._workers = workers or default_worker_count()

        if shuffle:
            order = derive_rng(seed, epoch).permutation(len(dataset)).tolist()
            self._batches = chunk_list(order, batch_size)
        else:
            order = list(range(len(dataset)))
            self._batches = [order[pos : pos + batch_size] for pos in range(0, len(order), batch_size)]

    def __len__(self) -> int:
        return len(self._batches)

    def build_batch(self, batch_index: int) -> Tuple[numpy.ndarray, numpy.ndarray]:
        """
          Builds one batch of the schedule.
        """
        rows = self._batches[batch_index]
        patches = self._dataset.patches[rows]
        if self._augmentation:
            rng = derive_rng(self._seed, self._epoch, batch_index)
            patches = numpy.stack(
                [apply_augmentation(patch, draw_augmentation(rng, self._augmentation)) for patch in patches]
            )

        return resize_patches(patches, self._input_size), self._dataset.labels[rows]

    def __iter__(self) -> Iterator[Tuple[numpy.ndarray, numpy.ndarray]]:
        if self._workers <= 1:
            for batch_index in range(len(self._batches)):
                yield self.build_batch(batch_index)
            return

        pending: "queue.Queue[Optional[Future]]" = queue.Queue(maxsize=2 * self._workers)
        stop = threading.Event()

        with ThreadPoolExecutor(max_workers=self._workers) as pool:

            def _produce():
                for batch_index in range(len(self._batches)):
                    future = pool.submit(self.build_batch, batch_index)
                    while not stop.is_set():
                        try:
                            pending.put(future, timeout=0.1)
                            break
                        except queue.Full:
                            continue
                    if stop.is_set():
                        future.cancel()
                        return
                pending.put(None)

            producer = threading.Thread(target=_produce, daemon=True)
            producer.start()
            try:
                while (future := pending.get()) is not None:
                    yield future.result()
            finally:
                stop.set()
                while not pending.empty():
                    queued = pending.get_nowait()
                    if queued is not None:
                        queued.cancel()
                producer.join()

