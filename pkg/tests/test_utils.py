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
This module contains unit tests for the utils methods.
"""

import logging
from unittest.mock import patch
import numpy as np
import pytest
from resedf.utils import get_logger, worker_count, grid_points, \
    WORKERS_ENV_VAR


def test_get_logger():
    """
    Test the get_logger method.
    """
    logger = get_logger("test_logger")
    assert logger is not None
    assert isinstance(logger, logging.Logger)
    assert logger.name == "test_logger"
    assert len(logger.handlers) == 1

    # Creating another with the same name should not add more handlers
    logger = get_logger("test_logger")
    assert len(logger.handlers) == 1


def test_worker_count():
    """
    Test the precedence of the override, the environment, the configured
    value and the core count.
    """
    with patch.dict("os.environ", {}, clear=True):
        assert worker_count(3) == 3
        with patch("os.cpu_count", return_value=6):
            assert worker_count() == 6
        with patch("os.cpu_count", return_value=None):
            assert worker_count() == 1
        with pytest.raises(ValueError):
            worker_count(0)

    with patch.dict("os.environ", {WORKERS_ENV_VAR: "2"}):
        assert worker_count(8) == 2
        assert worker_count(8, override=5) == 5
        with pytest.raises(ValueError):
            worker_count(8, override=0)
    with patch.dict("os.environ", {WORKERS_ENV_VAR: "-1"}):
        with pytest.raises(ValueError):
            worker_count()


def test_grid_points():
    """
    Test the evenly spaced grids.
    """
    grid = grid_points(-5.0, 5.0, 0.01)
    assert len(grid) == 1001
    assert grid[0] == -5.0 and grid[-1] == 5.0
    assert grid[500] == 0.0
    assert grid[1] == -4.99
    assert (np.diff(grid) > 0).all()

    assert np.array_equal(grid_points(0.0, 0.0, 1.0), [0.0])
    assert np.array_equal(grid_points(-1.0, 1.0, 0.5),
                          [-1.0, -0.5, 0.0, 0.5, 1.0])

    with pytest.raises(ValueError, match="step"):
        grid_points(0.0, 1.0, 0.0)
    with pytest.raises(ValueError, match="below"):
        grid_points(1.0, 0.0, 0.1)
