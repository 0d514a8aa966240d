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
This script defines the exceptions used in the resedf module.

Exceptions
----------
- DimensionMismatchException: Raised when vector dimensions disagree.
- EmptyWindowException: Raised when a weighted fit has no positive weight.
- InsufficientDataException: Raised when no complete case can be used.
- GridException: Raised when an evaluation grid is invalid.
- ErrorLawException: Raised when an error law is invalid or undefined
    at a point.
- DegenerateMomentsException: Raised when E[e^4] - E[e^3]^2 - 1 <= 0.
- QuadratureException: Raised when a numerical integral does not converge.
- DatasetException: Raised when a data file is malformed.
- InvalidConfigException: Raised when the configuration is invalid.
- SimulationException: Raised when a Monte Carlo run cannot complete.
"""

from typing import Optional

__all__ = ['DimensionMismatchException', 'EmptyWindowException',
           'InsufficientDataException', 'GridException',
           'ErrorLawException', 'DegenerateMomentsException',
           'QuadratureException', 'DatasetException',
           'InvalidConfigException', 'SimulationException']


class ResedfBaseException(Exception):
    """Base class for exceptions in this module."""


class DimensionMismatchException(ResedfBaseException):
    """Raised when vector dimensions disagree."""
    def __init__(self, expected: int, actual: int) -> None:
        super().__init__(
            f"Dimension mismatch: expected {expected}, got {actual}.")


class EmptyWindowException(ResedfBaseException):
    """Raised when a weighted fit has no positive weight."""


class InsufficientDataException(ResedfBaseException):
    """Raised when no complete case can be used for estimation."""


class GridException(ResedfBaseException):
    """Raised when an evaluation grid is invalid."""


class ErrorLawException(ResedfBaseException):
    """Raised when an error law is invalid or undefined at a point."""


class DegenerateMomentsException(ResedfBaseException):
    """Raised when E[e^4] - E[e^3]^2 - 1 is not positive."""
    def __init__(self, mu3: float, mu4: float) -> None:
        super().__init__(
            f"Degenerate moments: mu3={mu3}, mu4={mu4} give "
            f"mu4 - mu3^2 - 1 = {mu4 - mu3 ** 2 - 1} <= 0.")


class QuadratureException(ResedfBaseException):
    """Raised when a numerical integral does not converge."""


class DatasetException(ResedfBaseException):
    """Raised when a data file is malformed."""
    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidConfigException(ResedfBaseException):
    """Raised when the configuration is invalid."""


class SimulationException(ResedfBaseException):
    """Raised when a Monte Carlo run cannot complete."""
