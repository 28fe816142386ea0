"""Classes for internal use by `hepaclass.logs` module. Should not be imported outside this module"""
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

import logging
from typing import Optional, Dict, Any

from hepaclass.logs.models import RecordMetadata


class MetadataLogger(logging.Logger):
    """
    Wrapper for standard python logger that enriches messages with template metadata
    """

    def log_with_metadata(
        self,
        log_level: int,
        msg: str,
        template: str,
        tags: Optional[Dict[str, str]],
        diagnostics: Optional[str],
        metadata_fields: Optional[Dict[str, Any]],
        exception: Optional[BaseException],
    ):
        """
        Creates log entry with metadata from SemanticLogger

        :param log_level: Level defined in logging module.
        :param msg: Log message after templating.
        :param template: Raw message template.
        :param tags: Optional message tags.
        :param diagnostics: Optional additional diagnostics info.
        :param metadata_fields: Templated arguments (key=value).
        :param exception: Optional exception for warning and error levels
        """

        if not self.isEnabledFor(level=log_level):
            return
        log_metadata = RecordMetadata(
            template=template,
            diagnostics=diagnostics,
            tags=tags,
            fields=metadata_fields or {},
        )
        self._log(
            log_level,
            msg=msg,
            args=None,
            extra=log_metadata.attach(),
            exc_info=exception,
        )
