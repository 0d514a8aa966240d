# Copyright (c) 2024 The resedf contributors
#
# This program and the accompanying materials are made available under the
# terms of the Apache License, Version 2.0 which is available at
# https://www.apache.org/licenses/LICENSE-2.0.
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
# WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
# License for the specific language governing permissions and limitations
# under the License.
#
# SPDX-License-Identifier: Apache-2.0

"""
resedf main imports.
"""

from .exceptions import *
from ._components import *
from .cli import ingest_dataset
from .utils import ResedfLogLevel

__all__ = [name for name in globals() if not name.startswith('_')]
