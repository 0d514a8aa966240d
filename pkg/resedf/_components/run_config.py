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
This module defines the RunConfig class holding the settings of one
command line run, read from a flat YAML key: value file.

Classes
-------

- RunConfig:
    The validated settings of an estimate, simulate or efficiency run.

Usage
-----

- Load a configuration from a file:
    .. code-block:: python

        config = RunConfig.from_file("simulate", "path/to/study.yaml")

- Load a configuration from a string:
    .. code-block:: python

        config = RunConfig.from_string("estimate", "degree: 1\\n")

- Check if the configuration is valid:
    .. code-block:: python

        try:
            config = RunConfig.from_dict("efficiency", {"e_delta": 2})
        except InvalidConfigException as e:
            print(f"Invalid configuration: {e}")
"""

__all__ = ["RunConfig"]

import numbers
from typing import Optional

import numpy as np
import yaml

from .localpoly import KERNEL_DENSITIES, KernelSpec, SmootherConfig, \
    bandwidth_rule
from .efficiency import ErrorLaw, MissingnessSummary
from .simulation import StudyConfig
from ..exceptions import InvalidConfigException
from ..utils import ResedfLogLevel, grid_points, worker_count, DEFAULT_GRID


SUBCOMMANDS = ("estimate", "simulate", "efficiency")
"(tuple): The subcommands a configuration can belong to."

_COMMON_DEFAULTS = {
    "grid_start": DEFAULT_GRID[0],
    "grid_stop": DEFAULT_GRID[1],
    "grid_step": DEFAULT_GRID[2],
    "log_level": "INFO",
}

_SMOOTHER_DEFAULTS = {
    "degree": 3,
    "bandwidth": "auto",
    "kernel": "tricube",
    "variance_floor": 1e-6,
    "escalation_cap": 4.0,
}

DEFAULTS = {
    "estimate": {**_SMOOTHER_DEFAULTS, **_COMMON_DEFAULTS},
    "simulate": {
        **_SMOOTHER_DEFAULTS, **_COMMON_DEFAULTS,
        "sample_sizes": [100, 200, 500, 1000],
        "replications": 1000,
        "evaluation_points": [-3.0, -2.0, -1.0, 0.0],
        "seed": 20140101,
        "max_resamples": 10,
        "workers": None,
    },
    "efficiency": {
        **_COMMON_DEFAULTS,
        "e_delta": 0.5,
        "law": "normal",
        "evaluation_points": [-3.0, -2.0, -1.0, 0.0],
    },
}
"(dict): The allowed keys of every subcommand and their defaults."

_LAWS = {"normal": ErrorLaw.standard_normal}


def _is_int(value) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


def _is_number(value) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


class RunConfig():
    """
    The settings of one run. The settings can be loaded from a YAML
    file, string or dictionary. Missing keys take their defaults.

    Attributes:
        subcommand (str): estimate, simulate or efficiency.
        data_path (Optional[str]): The input data file of estimate.
        out_path (Optional[str]): The output file or directory.
        config_path (Optional[str]): The file the settings came from.
        workers_override (Optional[int]): A worker count that takes
            precedence over the environment and the settings.
    """
    # pylint: disable=too-many-arguments
    def __init__(self, subcommand: str, config: dict,
                 data_path: Optional[str] = None,
                 out_path: Optional[str] = None,
                 config_path: Optional[str] = None) -> None:
        """
        Initializes a RunConfig instance and validates it.

        Args:
            subcommand (str): The subcommand.
            config (dict): The configured values.
            data_path (Optional[str]): The input data file.
            out_path (Optional[str]): The output path.
            config_path (Optional[str]): The configuration file.

        Raises:
            InvalidConfigException: If the configuration is invalid.
        """
        if subcommand not in SUBCOMMANDS:
            raise InvalidConfigException(f"Unknown subcommand {subcommand}.")
        self.subcommand = subcommand
        self.data_path = data_path
        self.out_path = out_path
        self.config_path = config_path
        self.workers_override: Optional[int] = None
        self._config: dict = dict(config)
        self.check()

    @staticmethod
    def from_file(subcommand: str, file_path: str) -> 'RunConfig':
        """
        Loads a configuration from a file.

        Args:
            subcommand (str): The subcommand.
            file_path (str): The path to the YAML file.

        Returns:
            RunConfig: The configuration.

        Raises:
            InvalidConfigException: If the file cannot be read or parsed,
                or the configuration is invalid.
        """
        try:
            with open(file_path, 'r', encoding="utf-8") as file:
                content = file.read()
        except OSError as e:
            raise InvalidConfigException(
                f"Error reading configuration file: {e}") from e
        config = RunConfig.from_string(subcommand, content)
        config.config_path = file_path
        return config

    @staticmethod
    def from_string(subcommand: str, config: str) -> 'RunConfig':
        """
        Creates a RunConfig instance from a YAML string.

        Args:
            subcommand (str): The subcommand.
            config (str): The YAML mapping of keys to values.

        Returns:
            RunConfig: The configuration.

        Raises:
            InvalidConfigException: If the string is not a YAML mapping
                or the configuration is invalid.
        """
        try:
            parsed = yaml.safe_load(config)
        except yaml.YAMLError as e:
            raise InvalidConfigException(
                f"Error parsing configuration: {e}") from e
        if parsed is None:
            parsed = {}
        if not isinstance(parsed, dict):
            raise InvalidConfigException(
                "The configuration must be a mapping of keys to values.")
        return RunConfig.from_dict(subcommand, parsed)

    @staticmethod
    def from_dict(subcommand: str, config: dict) -> 'RunConfig':
        """
        Creates a RunConfig instance from a dictionary.

        Args:
            subcommand (str): The subcommand.
            config (dict): The configured values.

        Returns:
            RunConfig: The configuration.
        """
        return RunConfig(subcommand, config)

    def __getitem__(self, key: str):
        """
        Returns the configured value of a key, or its default.

        Args:
            key (str): An allowed key.

        Returns:
            The value.

        Raises:
            KeyError: If the key is not allowed for the subcommand.
        """
        defaults = DEFAULTS[self.subcommand]
        if key not in defaults:
            raise KeyError(key)
        return self._config.get(key, defaults[key])

    def set_override(self, key: str, value) -> None:
        """
        Replaces the value of a key, e.g. from a command line option, and
        validates the result.

        Args:
            key (str): The key.
            value: The new value.

        Raises:
            InvalidConfigException: If the result is invalid.
        """
        self._config[key] = value
        self.check()

    def override_workers(self, value: int) -> None:
        """
        Sets a worker count that wins over RESEDF_WORKERS and the
        workers key.

        Args:
            value (int): The worker count.

        Raises:
            InvalidConfigException: If the value is not a positive
                integer.
        """
        if not _is_int(value) or value < 1:
            raise InvalidConfigException("workers must be a positive integer.")
        self.workers_override = value

    # pylint: disable=too-many-branches
    def check(self) -> None:
        """
        Validates the configuration.

        Raises:
            InvalidConfigException: If a key is unknown or a value invalid.
        """
        allowed = DEFAULTS[self.subcommand]
        for key in self._config:
            if key not in allowed:
                raise InvalidConfigException(
                    f"Invalid key for {self.subcommand}: {key}")

        if not self._is_log_level(self["log_level"]):
            raise InvalidConfigException(
                f"Invalid log_level: {self['log_level']}")
        for key in ("grid_start", "grid_stop", "grid_step"):
            if not _is_number(self[key]):
                raise InvalidConfigException(f"{key} must be a number.")
        try:
            grid_points(self["grid_start"], self["grid_stop"],
                        self["grid_step"])
        except ValueError as e:
            raise InvalidConfigException(f"Invalid grid: {e}") from e

        if self.subcommand in ("estimate", "simulate"):
            self._check_smoother()
        if self.subcommand in ("simulate", "efficiency"):
            points = self["evaluation_points"]
            if not isinstance(points, list) or not points \
                    or not all(_is_number(t) for t in points) \
                    or not (np.diff(points) > 0).all():
                raise InvalidConfigException(
                    "evaluation_points must be an increasing list of numbers.")
        if self.subcommand == "simulate":
            self._check_study()
        if self.subcommand == "efficiency":
            if not _is_number(self["e_delta"]) \
                    or not 0 < self["e_delta"] <= 1:
                raise InvalidConfigException("e_delta must lie in (0, 1].")
            if self["law"] not in _LAWS:
                raise InvalidConfigException(
                    f"Unsupported law: {self['law']}")

    @staticmethod
    def _is_log_level(value) -> bool:
        return isinstance(value, str) \
            and value.upper() in ResedfLogLevel.__members__

    def _check_smoother(self) -> None:
        if not _is_int(self["degree"]) or self["degree"] < 0:
            raise InvalidConfigException(
                "degree must be a nonnegative integer.")
        bandwidth = self["bandwidth"]
        if bandwidth != "auto" and \
                (not _is_number(bandwidth) or not bandwidth > 0):
            raise InvalidConfigException(
                "bandwidth must be 'auto' or a positive number.")
        kernel = self["kernel"]
        names = kernel if isinstance(kernel, list) else [kernel]
        if not names or any(name not in KERNEL_DENSITIES for name in names):
            raise InvalidConfigException(f"Unknown kernel: {kernel}")
        if not _is_number(self["variance_floor"]) \
                or not self["variance_floor"] > 0:
            raise InvalidConfigException("variance_floor must be positive.")
        if not _is_number(self["escalation_cap"]) \
                or self["escalation_cap"] < 1:
            raise InvalidConfigException("escalation_cap must be >= 1.")

    def _check_study(self) -> None:
        sizes = self["sample_sizes"]
        if not isinstance(sizes, list) or not sizes \
                or not all(_is_int(n) and n >= 2 for n in sizes):
            raise InvalidConfigException(
                "sample_sizes must be a list of integers >= 2.")
        for key, minimum in (("replications", 1), ("seed", 0),
                             ("max_resamples", 0)):
            if not _is_int(self[key]) or self[key] < minimum:
                raise InvalidConfigException(
                    f"{key} must be an integer >= {minimum}.")
        workers = self["workers"]
        if workers is not None and (not _is_int(workers) or workers < 1):
            raise InvalidConfigException("workers must be a positive integer.")

    @property
    def log_level(self) -> ResedfLogLevel:
        """
        Returns the configured log level.

        Returns:
            ResedfLogLevel: The level.
        """
        return ResedfLogLevel[self["log_level"].upper()]

    def grid(self) -> np.ndarray:
        """
        Returns the t-grid of the run.

        Returns:
            np.ndarray: The points.
        """
        return grid_points(self["grid_start"], self["grid_stop"],
                           self["grid_step"])

    def _kernel(self) -> KernelSpec:
        kernel = self["kernel"]
        return KernelSpec(tuple(kernel) if isinstance(kernel, list)
                          else (kernel,))

    def to_smoother_config(self, n: int, dimension: int) -> SmootherConfig:
        """
        Returns the smoother settings for a sample of size n.

        Args:
            n (int): The sample size.
            dimension (int): The covariate dimension.

        Returns:
            SmootherConfig: The settings, with bandwidth_rule(n) for
                bandwidth 'auto'.

        Raises:
            InvalidConfigException: If the settings do not fit the sample.
        """
        bandwidth = self["bandwidth"]
        try:
            if bandwidth == "auto":
                bandwidth = bandwidth_rule(n)
            return SmootherConfig(
                dimension=dimension, degree=self["degree"],
                bandwidth=float(bandwidth), kernel=self._kernel(),
                variance_floor=float(self["variance_floor"]),
                escalation_cap=float(self["escalation_cap"]))
        except ValueError as e:
            raise InvalidConfigException(str(e)) from e

    def to_study_config(self) -> StudyConfig:
        """
        Returns the study settings. The worker count follows
        utils.worker_count.

        Returns:
            StudyConfig: The settings.

        Raises:
            InvalidConfigException: If the worker count is invalid.
        """
        bandwidth = self["bandwidth"]
        try:
            workers = worker_count(self["workers"], self.workers_override)
            return StudyConfig(
                sample_sizes=tuple(self["sample_sizes"]),
                replications=self["replications"],
                evaluation_points=tuple(
                    float(t) for t in self["evaluation_points"]),
                grid=(float(self["grid_start"]), float(self["grid_stop"]),
                      float(self["grid_step"])),
                seed=self["seed"],
                degree=self["degree"],
                bandwidth=None if bandwidth == "auto" else float(bandwidth),
                kernel=self._kernel(),
                variance_floor=float(self["variance_floor"]),
                escalation_cap=float(self["escalation_cap"]),
                max_resamples=self["max_resamples"],
                workers=workers)
        except ValueError as e:
            raise InvalidConfigException(str(e)) from e

    def error_law(self) -> ErrorLaw:
        """
        Returns the configured error law.

        Returns:
            ErrorLaw: The law.
        """
        return _LAWS[self["law"]]()

    def missingness(self) -> MissingnessSummary:
        """
        Returns the configured observation probability.

        Returns:
            MissingnessSummary: E[delta].
        """
        return MissingnessSummary(e_delta=float(self["e_delta"]))
