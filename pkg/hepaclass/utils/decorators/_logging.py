""" Module for common decorator methods. """
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

from functools import wraps
from typing import Optional

from hepaclass.logs import SemanticLogger
from hepaclass.logs.models import LogLevel
from hepaclass.utils._common import operation_time


def run_time_logged(operation_name: str, log_level: LogLevel = LogLevel.DEBUG):
    """
    Decorator that logs start and run time of the decorated function to the `logger` keyword argument.
    Functions called without a logger run silently.

    :param operation_name: Name of the operation reported in log messages.
    :param log_level: Level to log on. Default debug.
    """

    def outer_runtime_decorator(func):
        @wraps(func)
        def inner_runtime_decorator(*args, **kwargs):
            logger: Optional[SemanticLogger] = kwargs.get("logger", None)
            if logger is None:
                return func(*args, **kwargs)

            log_method = getattr(logger, log_level.value.lower().replace("warn", "warning"))
            log_method("Running {operation} ({method_name})", operation=operation_name, method_name=func.__name__)
            with operation_time() as ot:
                result = func(*args, **kwargs)
            log_method(
                "{operation} finished in {elapsed:.2f}s",
                operation=operation_name,
                elapsed=ot.elapsed / 1e9,
            )
            return result

        return inner_runtime_decorator

    return outer_runtime_decorator
