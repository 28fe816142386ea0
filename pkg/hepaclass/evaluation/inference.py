"""
 Batched inference over prepared datasets.
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
from typing import Optional, Tuple

import numpy

from hepaclass.data import PatchDataset, BatchStream
from hepaclass.nn.model import Model, predict
from hepaclass.utils import operation_time
from hepaclass.utils.concurrent_task_runner import ConcurrentTaskRunner, Executable


@dataclass
class DatasetPrediction:
    """
    Class probabilities of every dataset row, in dataset order.
    """

    probabilities: numpy.ndarray
    labels: numpy.ndarray
    lesion_ids: list
    mean_inference_ms: float

    @property
    def predicted(self) -> numpy.ndarray:
        """Argmax class per row"""
        return numpy.argmax(self.probabilities, axis=1)

    @property
    def accuracy(self) -> float:
        """Share of rows whose argmax matches the label"""
        return float(numpy.mean(self.predicted == self.labels))


def _timed_predict(model: Model, batch: numpy.ndarray) -> Tuple[numpy.ndarray, int]:
    with operation_time() as ot:
        probabilities = predict(model, batch)
    return probabilities, ot.elapsed


def predict_dataset(
    model: Model, dataset: PatchDataset, batch_size: int = 1, workers: Optional[int] = None
) -> DatasetPrediction:
    """
      Runs inference-mode prediction over every row of `dataset`, without augmentation.
      Batches run concurrently; the model is not modified.

    :param model: Classifier.
    :param dataset: Prepared patches.
    :param batch_size: Rows per forward pass. 1 keeps every prediction independent of row order.
    :param workers: Inference threads.
    :return: Probabilities in dataset order and the mean inference time per row.
    """
    stream = BatchStream(
        dataset, batch_size=batch_size, input_size=model.config.input_size, shuffle=False, workers=1
    )
    results = ConcurrentTaskRunner(
        [
            Executable(func=_timed_predict, args=[model, batch], alias=str(batch_index))
            for batch_index, (batch, _) in enumerate(stream)
        ],
        num_threads=workers,
    ).eager()

    batches = [results[str(batch_index)] for batch_index in range(len(results))]
    probabilities = (
        numpy.concatenate([batch_probabilities for batch_probabilities, _ in batches])
        if batches
        else numpy.zeros((0, model.config.num_classes), dtype=numpy.float32)
    )
    elapsed_ns = sum(elapsed for _, elapsed in batches)

    return DatasetPrediction(
        probabilities=probabilities,
        labels=dataset.labels.copy(),
        lesion_ids=list(dataset.lesion_ids),
        mean_inference_ms=elapsed_ns / 1e6 / max(len(dataset), 1),
    )
