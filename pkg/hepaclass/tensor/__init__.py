"""
 Module index.
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

from hepaclass.tensor._models import *
from hepaclass.tensor._tensor import *
from hepaclass.tensor.activations import *
from hepaclass.tensor.conv import *
from hepaclass.tensor.linear import *
from hepaclass.tensor.losses import *
from hepaclass.tensor.normalization import *
from hepaclass.tensor.pooling import *
from hepaclass.tensor.structural import *
