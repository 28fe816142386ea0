"""
 Thread pool runner for independent per-lesion work (patch extraction, inference).
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

from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Any, List, TypeVar, Generic, Optional, Dict

from hepaclass.utils._common import default_worker_count

T = TypeVar("T")


@dataclass
class Executable(Generic[T]):
    """
    A single executable function with arguments, ready to run if invoked.
    """

    func: Callable[..., T]
    alias: str
    args: List[Any] = field(default_factory=list)
    kwargs: Dict[str, Any] = field(default_factory=dict)


class ConcurrentTaskRunner(Generic[T]):
    """
     Runs a list of independent functions on a thread pool and returns results keyed by alias,
     in submission order regardless of completion order.

      tasks = [Executable(func=extract_patch_triplet, args=[volume, record], alias=record.lesion_id), ..]
      triplets = ConcurrentTaskRunner(tasks, num_threads=4).eager()

     numpy releases the GIL inside its kernels, so threads are enough for array work.

    :param func_list: Functions to run.
    :param num_threads: Maximum number of threads to use, `default_worker_count()` if not provided.
    """

    def __init__(self, func_list: List[Executable[T]], num_threads: Optional[int] = None):
        aliases = [executable.alias for executable in func_list]
        if len(set(aliases)) != len(aliases):
            raise ValueError("Executable aliases must be unique")

        self._func_list = func_list
        self._num_threads = num_threads

    def _run_tasks(self) -> Dict[str, Future]:
        with ThreadPoolExecutor(max_workers=self._num_threads or default_worker_count()) as runner_pool:
            return {
                executable.alias: runner_pool.submit(executable.func, *executable.args, **executable.kwargs)
                for executable in self._func_list
            }

    def lazy(self) -> Dict[str, Future]:
        """
         Executes the function list without explicitly collecting the results.

        :return: A dictionary of (task_alias, task_future)
        """
        return self._run_tasks()

    def eager(self) -> Dict[str, T]:
        """
         Executes the function list and waits for all tasks. The first task exception is re-raised.

        :return: A dictionary of (task_alias, task_result)
        """
        return {task_name: task.result() for task_name, task in self._run_tasks().items()}
