"""
 Structured metadata attached to log records.
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

import logging
from dataclasses import dataclass, field
from typing import Optional, Dict, Any

# LogRecord attribute holding the metadata
RECORD_ATTRIBUTE = "hepaclass_metadata"


@dataclass(frozen=True)
class RecordMetadata:
    """
    Template and field values of a SemanticLogger message, for handlers that emit structured output.
    """

    template: str
    fields: Dict[str, Any] = field(default_factory=dict)
    tags: Optional[Dict[str, str]] = None
    diagnostics: Optional[str] = None

    def attach(self) -> Dict[str, "RecordMetadata"]:
        """`extra` argument for `logging.Logger._log`"""
        return {RECORD_ATTRIBUTE: self}

    @classmethod
    def of(cls, record: logging.LogRecord) -> Optional["RecordMetadata"]:
        """Metadata of `record`, None for records not emitted by SemanticLogger"""
        return getattr(record, RECORD_ATTRIBUTE, None)
