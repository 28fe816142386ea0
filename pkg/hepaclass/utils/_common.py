"""Common utility functions. All of these are imported into __init__.py"""
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

import contextlib
import os
import sys
import time
from collections import namedtuple
from typing import List, Any, Sequence, Union

import numpy

__all__ = ["operation_time", "chunk_list", "default_worker_count", "derive_rng"]


@contextlib.contextmanager
def operation_time():
    """
      Returns execution time for the context block.
    :return: A namedtuple-like object with start, end and elapsed (ns) filled on exit.
    """
    result = namedtuple("OperationDuration", ["start", "end", "elapsed"])
    result.start = time.monotonic_ns()
    result.end = 0
    result.elapsed = 0
    yield result
    result.end = time.monotonic_ns()
    result.elapsed = result.end - result.start


def chunk_list(value: List[Any], chunk_size: int) -> List[List[Any]]:
    """
     Splits the provided list into consecutive chunks of `chunk_size` elements. A trailing chunk
     shorter than `chunk_size` is dropped.

    :param value: A list to chunk.
    :param chunk_size: Number of elements per chunk.
    :return: A list of full chunks, in order.
    """
    if chunk_size <= 0:
        raise ValueError("Chunk size must be greater than zero")
    return [value[pos : pos + chunk_size] for pos in range(0, len(value) - chunk_size + 1, chunk_size)]


def default_worker_count() -> int:
    """
      Number of data loader threads to use when nothing is configured: HEPACLASS__WORKERS if set,
      otherwise logical cores available to this process minus one, at least one.
    """
    if "HEPACLASS__WORKERS" in os.environ:
        return max(1, int(os.environ["HEPACLASS__WORKERS"]))

    cores = len(os.sched_getaffinity(0)) if sys.platform not in ["win32", "darwin"] else os.cpu_count()
    return max(1, (cores or 1) - 1)


def derive_rng(seed: int, *stream: Union[int, Sequence[int]]) -> numpy.random.Generator:
    """
      Creates an independent random generator for a (seed, stream...) key, for example (seed, epoch, batch).
      Identical keys always produce identical generators.

    :param seed: Root seed.
    :param stream: Additional non-negative integers identifying the stream.
    :return: numpy Generator
    """
    entropy = [seed]
    for part in stream:
        entropy.extend(part if isinstance(part, (list, tuple)) else [part])

    return numpy.random.default_rng(numpy.random.SeedSequence(entropy))

