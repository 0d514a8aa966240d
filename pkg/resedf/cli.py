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
This script defines the resedf command line interface.

Subcommands
-----------

- estimate:
    Estimates the error distribution function from a data file.
- simulate:
    Runs the Monte Carlo study and writes its tables.
- efficiency:
    Writes the asymptotic mean squared error curve and its integral.

Exit codes
----------

- 0: success
- 1: usage or configuration error
- 2: data error
- 3: numerical failure

Usage
-----

- Estimate on user data:
    .. code-block:: bash

        resedf estimate --data sample.csv --config estimate.yaml \\
            --out curve.csv

- Run the study with 8 workers:
    .. code-block:: bash

        RESEDF_WORKERS=8 resedf simulate --config study.yaml --out tables/
"""

__all__ = ["ingest_dataset", "cmd_estimate", "cmd_simulate",
           "cmd_efficiency", "main"]

import argparse
import math
import os
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ._components.localpoly import Dataset
from ._components.edf import complete_case_residuals, edf_curve
from ._components.efficiency import amise, amse_curve
from ._components.simulation import run_study
from ._components.run_config import RunConfig
from .exceptions import ResedfBaseException, DatasetException, \
    DimensionMismatchException, EmptyWindowException, \
    InsufficientDataException, InvalidConfigException
from .utils import get_logger, NUMERIC_FORMAT


logger = get_logger()

EXIT_OK = 0
"(int): Successful run."
EXIT_USAGE = 1
"(int): Invalid command line or configuration."
EXIT_DATA = 2
"(int): Malformed or insufficient data."
EXIT_NUMERICAL = 3
"(int): Numerical failure."

_DATA_ERRORS = (DatasetException, InsufficientDataException,
                EmptyWindowException, DimensionMismatchException)

BIAS_VARIANCE_FILE = "bias_variance.csv"
"(str): The scaled bias and variance table of simulate."
MSE_MISE_FILE = "mse_mise.csv"
"(str): The scaled MSE and MISE table of simulate."


def _parse_float(value: str, column: str, line: int) -> float:
    try:
        number = float(value)
    except ValueError as e:
        raise DatasetException(
            f"{column} is not numeric: \"{value}\"", line=line) from e
    if not math.isfinite(number):
        raise DatasetException(f"{column} is not finite: \"{value}\"",
                               line=line)
    return number


def _check_header(columns: list[str]) -> int:
    if len(columns) < 3 or columns[-2:] != ["y", "delta"]:
        raise DatasetException(
            "The header must be x1,...,xm,y,delta.", line=1)
    expected = [f"x{k + 1}" for k in range(len(columns) - 2)]
    if columns[:-2] != expected:
        raise DatasetException(
            f"Expected covariate columns {','.join(expected)}, got "
            f"{','.join(columns[:-2])}.", line=1)
    return len(expected)


def ingest_dataset(path: str) -> Dataset:
    """
    Reads a comma separated data file with header x1,...,xm,y,delta.
    The response may be empty on rows with delta = 0 and is stored as 0.

    Args:
        path (str): The file path.

    Returns:
        Dataset: The sample.

    Raises:
        DatasetException: If the file is missing or malformed. The
            exception carries the offending line number.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            skipinitialspace=True)
    except pd.errors.EmptyDataError as e:
        raise DatasetException("The file has no header.", line=1) from e
    except (OSError, pd.errors.ParserError) as e:
        raise DatasetException(f"Cannot read data file: {e}") from e

    columns = [str(column).strip() for column in frame.columns]
    m = _check_header(columns)
    x = np.empty((len(frame), m))
    y = np.zeros(len(frame))
    delta = np.zeros(len(frame), dtype=np.int8)
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + 2
        fields = [str(value).strip() for value in row]
        for k in range(m):
            x[index, k] = _parse_float(fields[k], columns[k], line)
        indicator = _parse_float(fields[-1], "delta", line)
        if indicator not in (0.0, 1.0):
            raise DatasetException(
                f"delta must be 0 or 1, got \"{fields[-1]}\"", line=line)
        delta[index] = int(indicator)
        if fields[-2] == "":
            if indicator == 1.0:
                raise DatasetException("y is empty while delta is 1",
                                       line=line)
        elif indicator == 1.0:
            y[index] = _parse_float(fields[-2], "y", line)
        else:
            _parse_float(fields[-2], "y", line)
    logger.debug("Read %s rows with %s covariates from %s.",
                 len(frame), m, path)
    return Dataset.from_arrays(x, y, delta)


def _write_frame(frame: pd.DataFrame, path: str) -> None:
    frame.to_csv(path, index=False, float_format=NUMERIC_FORMAT,
                 lineterminator="\n")
    logger.info("Wrote %s.", path)


def cmd_estimate(config: RunConfig) -> None:
    """
    Estimates the error distribution function from the complete cases of
    config.data_path and writes t,F_hat rows followed by '# key,value'
    diagnostic lines to config.out_path.

    Args:
        config (RunConfig): An estimate configuration.

    Raises:
        DatasetException: If the data file is malformed.
        InsufficientDataException: If there is no usable complete case.
    """
    data = ingest_dataset(config.data_path)
    if data.N == 0:
        raise InsufficientDataException("The data has no complete case.")
    smoother = config.to_smoother_config(data.n, data.dimension)
    residuals = complete_case_residuals(data, smoother)
    curve = edf_curve(residuals, config.grid())

    _write_frame(pd.DataFrame({"t": curve.grid, "F_hat": curve.values}),
                 config.out_path)
    diagnostics = residuals.diagnostics()
    diagnostics.update({
        "bandwidth": smoother.bandwidth,
        "r_hat_min": float(residuals.r_hat.min()),
        "r_hat_max": float(residuals.r_hat.max()),
        "sigma_hat_min": float(residuals.sigma_hat.min()),
        "sigma_hat_max": float(residuals.sigma_hat.max()),
    })
    with open(config.out_path, "a", encoding="utf-8") as file:
        for key, value in diagnostics.items():
            if isinstance(value, float):
                value = NUMERIC_FORMAT % value
            file.write(f"# {key},{value}\n")


def cmd_simulate(config: RunConfig) -> None:
    """
    Runs the study and writes the scaled bias and variance table and the
    scaled MSE and MISE table, whose last row n = inf holds the asymptotic
    values, into the directory config.out_path.

    Args:
        config (RunConfig): A simulate configuration.

    Raises:
        SimulationException: If a replication cannot complete.
    """
    study = config.to_study_config()
    logger.info("Study with seed %s and %s workers.",
                study.seed, study.workers)
    result = run_study(study)
    os.makedirs(config.out_path, exist_ok=True)
    _write_frame(result.bias_variance_frame(),
                 os.path.join(config.out_path, BIAS_VARIANCE_FILE))
    _write_frame(result.mse_mise_frame(),
                 os.path.join(config.out_path, MSE_MISE_FILE))
    if result.resamples:
        logger.info("%s replications were resampled.", result.resamples)


def cmd_efficiency(config: RunConfig) -> None:
    """
    Writes t,AMSE rows over the grid and a trailing AMISE line to
    config.out_path.

    Args:
        config (RunConfig): An efficiency configuration.

    Raises:
        QuadratureException: If a quadrature fails.
    """
    law = config.error_law()
    miss = config.missingness()
    grid = config.grid()
    curve = amse_curve(law, miss, grid)
    total = amise(law, miss, grid, curve=curve)
    _write_frame(pd.DataFrame({"t": grid, "AMSE": curve}), config.out_path)
    with open(config.out_path, "a", encoding="utf-8") as file:
        file.write(f"AMISE,{NUMERIC_FORMAT % total}\n")
    points = config["evaluation_points"]
    for t, value in zip(points, amse_curve(law, miss, points)):
        logger.info("AMSE(%g) = %.4f", t, value)
    logger.info("AMISE = %.4f", total)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resedf",
        description="Residual-based error distribution estimation with "
                    "responses missing at random.")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    estimate = subparsers.add_parser(
        "estimate", help="Estimate the error distribution function.")
    estimate.add_argument("--data", required=True,
                          help="CSV file with header x1,...,xm,y,delta")
    estimate.add_argument("--config", help="YAML configuration file")
    estimate.add_argument("--out", required=True, help="Output CSV file")

    simulate = subparsers.add_parser(
        "simulate", help="Run the Monte Carlo study.")
    simulate.add_argument("--config", help="YAML configuration file")
    simulate.add_argument("--out", required=True, help="Output directory")
    simulate.add_argument("--seed", type=int, help="Master seed override")
    simulate.add_argument("--workers", type=int,
                          help="Worker process count, wins over "
                               "RESEDF_WORKERS")

    efficiency = subparsers.add_parser(
        "efficiency", help="Write the asymptotic mean squared error.")
    efficiency.add_argument("--config", help="YAML configuration file")
    efficiency.add_argument("--out", required=True, help="Output CSV file")
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        config = RunConfig.from_file(args.subcommand, args.config)
    else:
        config = RunConfig.from_dict(args.subcommand, {})
    config.out_path = args.out
    config.data_path = getattr(args, "data", None)
    seed = getattr(args, "seed", None)
    if seed is not None:
        config.set_override("seed", seed)
    workers = getattr(args, "workers", None)
    if workers is not None:
        config.override_workers(workers)
    return config


_COMMANDS = {
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "efficiency": cmd_efficiency,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Runs the command line interface.

    Args:
        argv (Optional[Sequence[str]]): The arguments, without the program
            name. Defaults to sys.argv[1:].

    Returns:
        int: The exit code.
    """
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        config = _load_config(args)
        logger.setLevel(config.log_level.value)
        _COMMANDS[args.subcommand](config)
    except InvalidConfigException as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_USAGE
    except _DATA_ERRORS as e:
        logger.error("Data error: %s", e)
        return EXIT_DATA
    except ResedfBaseException as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    return EXIT_OK
