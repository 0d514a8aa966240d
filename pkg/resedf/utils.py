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
This script provides general functionality and constants for resedf.

Enums
-----

- ResedfLogLevel:
    Represents the log levels used by the library and the CLI.

Functions
---------

- get_logger:
    Creates and returns the logger.
- worker_count:
    Resolves the number of worker processes.
- grid_points:
    Builds an evenly spaced evaluation grid.
"""

import logging
import os
import threading
from enum import Enum
from typing import Optional

import numpy as np


WORKERS_ENV_VAR = "RESEDF_WORKERS"
"(str): Environment variable overriding the worker count."

DEFAULT_GRID = (-5.0, 5.0, 0.01)
"(tuple): Default (start, stop, step) of the t-grid for curves and MISE."

DEFAULT_QUADRATURE_DOMAIN = (-10.0, 10.0)
"(tuple): Default integration domain for error law moments."

DEFAULT_QUADRATURE_TOL = 1e-8
"(float): Default absolute tolerance of the quadrature."

NUMERIC_FORMAT = "%.6g"
"(str): Format of floating point numbers in output files."


# Used to sync across different threads when adding handlers
_logger_lock = threading.Lock()


class ResedfLogLevel(Enum):
    """ resedf log levels. """
    ERROR = logging.ERROR
    "(int): Error log level."
    WARN = logging.WARN
    "(int): Warning log level."
    INFO = logging.INFO
    "(int): Info log level."
    DEBUG = logging.DEBUG
    "(int): Debug log level."


def get_logger(name="resedf"):
    """
    Returns a configured logger with a custom format.

    Args:
        name (str): The name of the logger.
    """
    logger = logging.getLogger(name)

    with _logger_lock:
        if not any(isinstance(handler, logging.StreamHandler)
                   for handler in logger.handlers):
            formatter = logging.Formatter(
                '%(asctime)s %(message)s', datefmt="[%F %T]"
            )
            handler = logging.StreamHandler()
            handler.setFormatter(formatter)
            logger.addHandler(handler)

    return logger


def worker_count(configured: Optional[int] = None,
                 override: Optional[int] = None) -> int:
    """
    Resolves the number of worker processes. An explicit override, such
    as a command line option, takes precedence over the environment
    variable, which takes precedence over the configured value, which
    takes precedence over the number of available cores.

    Args:
        configured (Optional[int]): The value from the configuration.
        override (Optional[int]): The value given on the command line.

    Returns:
        int: A positive number of workers.

    Raises:
        ValueError: If the resolved value is not a positive integer.
    """
    env_value = os.environ.get(WORKERS_ENV_VAR)
    if override is not None:
        workers = int(override)
    elif env_value:
        workers = int(env_value)
    elif configured is not None:
        workers = int(configured)
    else:
        workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError(f"Worker count must be positive, got {workers}.")
    return workers


def grid_points(start: float, stop: float, step: float) -> np.ndarray:
    """
    Returns the points start, start + step, ..., stop, rounded to twelve
    decimals so that the points of decimal steps print exactly.

    Args:
        start (float): The first point.
        stop (float): The last point.
        step (float): The positive spacing.

    Returns:
        np.ndarray: The strictly increasing points.

    Raises:
        ValueError: If the step is not positive or stop < start.
    """
    if not step > 0:
        raise ValueError(f"The grid step must be positive, got {step}.")
    if stop < start:
        raise ValueError(f"The grid stop {stop} is below its start {start}.")
    count = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(count), 12)
