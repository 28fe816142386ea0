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

import time
from typing import List, Any, Dict
from unittest.mock import patch

import numpy
import pytest

from hepaclass.logs.models import LogLevel
from hepaclass.utils import operation_time, chunk_list, default_worker_count, derive_rng, run_time_logged
from hepaclass.utils.concurrent_task_runner import Executable, ConcurrentTaskRunner


def test_operation_time():
    def custom_method():
        time.sleep(0.2)
        return {"exit_code": 0}

    with operation_time() as ot:
        result = custom_method()

    assert ot.elapsed >= 0.2e9 and ot.end > ot.start
    assert result == {"exit_code": 0}


@pytest.mark.parametrize(
    "list_to_chunk,chunk_size,expected_list",
    [
        (list(range(10)), 3, [[0, 1, 2], [3, 4, 5], [6, 7, 8]]),
        (list(range(10)), 5, [[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]]),
        (list(range(3)), 4, []),
        ([], 2, []),
    ],
)
def test_chunk_list(list_to_chunk: List[Any], chunk_size: int, expected_list):
    assert chunk_list(list_to_chunk, chunk_size) == expected_list


def test_chunk_list_invalid():
    with pytest.raises(ValueError):
        chunk_list([1, 2], 0)


@pytest.mark.parametrize("workers,expected", [("3", 3), ("0", 1), ("1", 1)])
def test_default_worker_count(workers: str, expected: int):
    with patch.dict("os.environ", {"HEPACLASS__WORKERS": workers}):
        assert default_worker_count() == expected


def test_default_worker_count_from_cores():
    with patch.dict("os.environ", {}, clear=True):
        assert default_worker_count() >= 1


def test_derive_rng():
    first = derive_rng(7, 2, 5).random(4)

    numpy.testing.assert_array_equal(first, derive_rng(7, 2, 5).random(4))
    numpy.testing.assert_array_equal(first, derive_rng(7, (2, 5)).random(4))
    assert not numpy.array_equal(first, derive_rng(7, 2, 6).random(4))
    assert not numpy.array_equal(first, derive_rng(8, 2, 5).random(4))
    assert not numpy.array_equal(derive_rng(7).random(4), derive_rng(7, 0).random(4))


def mock_func(a: float, b: str, c: bool) -> Dict:
    time.sleep(0.1 * a)
    return {"a": a, "b": b, "c": c}


def failing_func() -> None:
    raise RuntimeError("task failed")


@pytest.mark.parametrize("num_threads", [1, 3, None])
def test_concurrent_task_runner(num_threads):
    func_list = [
        Executable[Dict](func=mock_func, args=[3, "test2", False], alias="case3"),
        Executable[Dict](func=mock_func, args=[1], kwargs={"b": "test", "c": True}, alias="case1"),
        Executable[Dict](func=mock_func, args=[2, "test1", True], alias="case2"),
    ]
    expectations = {
        "case3": {"a": 3, "b": "test2", "c": False},
        "case1": {"a": 1, "b": "test", "c": True},
        "case2": {"a": 2, "b": "test1", "c": True},
    }

    lazy = ConcurrentTaskRunner(func_list, num_threads).lazy()
    eager = ConcurrentTaskRunner(func_list, num_threads).eager()

    assert {name: future.result() for name, future in lazy.items()} == expectations
    assert list(eager) == ["case3", "case1", "case2"]
    assert eager == expectations


def test_concurrent_task_runner_errors():
    with pytest.raises(ValueError):
        ConcurrentTaskRunner([Executable(func=failing_func, alias="a"), Executable(func=failing_func, alias="a")])

    with pytest.raises(RuntimeError, match="task failed"):
        ConcurrentTaskRunner([Executable(func=failing_func, alias="a")], num_threads=1).eager()


@pytest.mark.parametrize("log_level,expected_levelno", [(LogLevel.DEBUG, 10), (LogLevel.INFO, 20), (LogLevel.WARN, 30)])
def test_run_time_logged(captured_logger, log_level: LogLevel, expected_levelno: int):
    logger, records = captured_logger

    @run_time_logged("patch extraction", log_level=log_level)
    def extract(value: int, **_kwargs) -> int:
        return value * 2

    assert extract(3) == 6
    assert not records

    assert extract(4, logger=logger) == 8
    messages = [record.getMessage() for record in records]
    assert messages[0] == "Running patch extraction (extract)"
    assert messages[1].startswith("patch extraction finished in ") and messages[1].endswith("s")
    assert {record.levelno for record in records} == {expected_levelno}
