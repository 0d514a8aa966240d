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
This module contains the Monte Carlo study of the complete case error
distribution function estimator: data generation from a heteroskedastic
regression model with covariate dependent missingness, replications on
independent random streams and the scaled bias, variance, mean squared
error and integrated mean squared error summaries.

Classes
-------

- TrueModel:
    The data generating regression model.
- StudyConfig:
    The sample sizes, replications, grids and smoother settings.
- ReplicationResult:
    The estimated curve of a single replication.
- SummaryTable:
    The scaled statistics for one sample size.
- StudyResult:
    All summary tables plus the asymptotic row.

Functions
---------

- replication_stream:
    The random stream of a replication.
- generate_sample / generate_dataset:
    Draws a sample from the model.
- missingness_summary:
    E[pi(X)] by quadrature over the covariate law.
- run_replication:
    Estimates the error distribution function on one generated sample.
- summarize:
    Scaled statistics over the replications of one sample size.
- run_study:
    The complete study.

Usage
-----

- Run a small study:
    .. code-block:: python

        cfg = StudyConfig(sample_sizes=(100, 500), replications=200)
        result = run_study(cfg)
        print(result.mse_mise_frame())
"""

__all__ = ["TrueModel", "StudyConfig", "ReplicationResult", "SummaryTable",
           "StudyResult", "replication_stream", "generate_sample",
           "generate_dataset", "missingness_summary", "run_replication",
           "summarize", "run_study"]

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
import pandas as pd
from scipy import integrate

from .localpoly import Dataset, KernelSpec, SmootherConfig, bandwidth_rule
from .edf import complete_case_residuals, edf_curve
from .efficiency import ErrorLaw, MissingnessSummary, amise, amse_curve
from ..exceptions import EmptyWindowException, InsufficientDataException, \
    SimulationException
from ..utils import get_logger, grid_points, DEFAULT_GRID


logger = get_logger()

DEFAULT_SEED = 20140101
"(int): Default master seed of the study."


def default_regression(x: np.ndarray) -> np.ndarray:
    """ r(x1, x2) = 1 + x1 - x2 + 2 exp(-sqrt(x1^2 + x2^2) / 2). """
    radius = np.sqrt(x[:, 0] ** 2 + x[:, 1] ** 2)
    return 1.0 + x[:, 0] - x[:, 1] + 2.0 * np.exp(-0.5 * radius)


def default_scale(x: np.ndarray) -> np.ndarray:
    """ sigma(x1, x2) = sqrt(1 + 2 x1^2 + 2 x2^2). """
    return np.sqrt(1.0 + 2.0 * x[:, 0] ** 2 + 2.0 * x[:, 1] ** 2)


def default_observation_probability(x: np.ndarray) -> np.ndarray:
    """ pi(x1, x2) = 1 - 1 / (1 + exp(-(x1 + x2) / 2)). """
    return 1.0 - 1.0 / (1.0 + np.exp(-0.5 * (x[:, 0] + x[:, 1])))


@dataclass(frozen=True, eq=False)
class TrueModel:
    """
    The model Y = r(X) + sigma(X) e with X uniform on a box, e independent
    of X and delta ~ Bernoulli(pi(X)). The functions map covariate arrays
    of shape (n, m) to arrays of shape (n,).

    Attributes:
        regression (Callable): The regression function r.
        scale (Callable): The positive scale function sigma.
        observation_probability (Callable): The function pi.
        law (ErrorLaw): The law of e.
        bounds (tuple): The (low, high) interval of every covariate.
    """
    regression: Callable = default_regression
    scale: Callable = default_scale
    observation_probability: Callable = default_observation_probability
    law: ErrorLaw = field(default_factory=ErrorLaw.standard_normal)
    bounds: tuple = ((-1.0, 1.0), (-1.0, 1.0))

    def __post_init__(self) -> None:
        points = self.check_points()
        if not (self.scale(points) > 0).all():
            raise ValueError("The scale function must be positive.")
        probability = self.observation_probability(points)
        if not ((probability > 0) & (probability < 1)).all():
            raise ValueError("The observation probability must lie in (0, 1).")

    @property
    def dimension(self) -> int:
        """
        Returns the covariate dimension.

        Returns:
            int: The number of covariates.
        """
        return len(self.bounds)

    def check_points(self, per_axis: int = 21) -> np.ndarray:
        """
        Returns a regular grid over the covariate box, corners included.

        Args:
            per_axis (int): Points per coordinate.

        Returns:
            np.ndarray: The points, shape (per_axis^m, m).
        """
        axes = [np.linspace(low, high, per_axis) for low, high in self.bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([axis.ravel() for axis in mesh])


@dataclass(frozen=True)
class StudyConfig:
    """
    The settings of a Monte Carlo study.

    Attributes:
        sample_sizes (tuple[int, ...]): The sample sizes n.
        replications (int): The number R of replications per sample size.
        evaluation_points (tuple[float, ...]): Increasing points t for the
            pointwise statistics.
        grid (tuple[float, float, float]): (start, stop, step) of the
            integration grid.
        seed (int): The master seed.
        degree (int): The local polynomial degree.
        bandwidth (Optional[float]): A fixed bandwidth; None uses
            bandwidth_rule(n).
        kernel (KernelSpec): The product kernel.
        variance_floor (float): The floor of the variance estimate.
        escalation_cap (float): The largest bandwidth as a multiple of the
            initial one.
        max_resamples (int): Resamples allowed for a failed replication.
        workers (int): Worker processes; 1 runs in-process.
    """
    # pylint: disable=too-many-instance-attributes
    sample_sizes: tuple = (100, 200, 500, 1000)
    replications: int = 1000
    evaluation_points: tuple = (-3.0, -2.0, -1.0, 0.0)
    grid: tuple = DEFAULT_GRID
    seed: int = DEFAULT_SEED
    degree: int = 3
    bandwidth: Optional[float] = None
    kernel: KernelSpec = field(default_factory=KernelSpec)
    variance_floor: float = 1e-6
    escalation_cap: float = 4.0
    max_resamples: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("At least one replication is required.")
        if not self.sample_sizes or min(self.sample_sizes) < 2:
            raise ValueError("Sample sizes must be at least 2.")
        if not (np.diff(self.evaluation_points) > 0).all():
            raise ValueError("Evaluation points must be increasing.")
        if self.max_resamples < 0:
            raise ValueError("max_resamples must be nonnegative.")
        if self.workers < 1:
            raise ValueError("workers must be positive.")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("The bandwidth must be positive.")
        grid_points(*self.grid)

    @property
    def mise_grid(self) -> np.ndarray:
        """
        Returns the integration grid.

        Returns:
            np.ndarray: The points.
        """
        return grid_points(*self.grid)

    def smoother_config(self, n: int, dimension: int) -> SmootherConfig:
        """
        Returns the smoother settings for a sample size.

        Args:
            n (int): The sample size.
            dimension (int): The covariate dimension.

        Returns:
            SmootherConfig: The settings.
        """
        bandwidth = self.bandwidth if self.bandwidth is not None \
            else bandwidth_rule(n)
        return SmootherConfig(dimension=dimension, degree=self.degree,
                              bandwidth=bandwidth, kernel=self.kernel,
                              variance_floor=self.variance_floor,
                              escalation_cap=self.escalation_cap)


@dataclass(frozen=True, eq=False)
class ReplicationResult:
    """
    The estimate of one replication.

    Attributes:
        n (int): The sample size.
        k (int): The replication index.
        points (np.ndarray): The estimate at the evaluation points.
        grid_values (np.ndarray): The estimate on the integration grid.
        resamples (int): Failed attempts before this sample.
        clamped (int): Scale fits clamped at the variance floor.
    """
    n: int
    k: int
    points: np.ndarray
    grid_values: np.ndarray
    resamples: int = 0
    clamped: int = 0


@dataclass(frozen=True, eq=False)
class SummaryTable:
    """
    The scaled statistics of one sample size.

    Attributes:
        n (int): The sample size.
        evaluation_points (np.ndarray): The points t.
        bias (np.ndarray): sqrt(n) (mean F_hat(t) - F(t)).
        variance (np.ndarray): n times the sample variance of F_hat(t).
        mse (np.ndarray): n times the mean of (F_hat(t) - F(t))^2.
        mise (float): The trapezoidal integral of the scaled MSE.
        replications (int): The number of replications.
        seed (int): The master seed.
        resamples (int): The number of resampled replications.
        clamped (int): Scale fits clamped at the variance floor, over
            all replications.
    """
    # pylint: disable=too-many-instance-attributes
    n: int
    evaluation_points: np.ndarray
    bias: np.ndarray
    variance: np.ndarray
    mse: np.ndarray
    mise: float
    replications: int
    seed: int
    resamples: int = 0
    clamped: int = 0


@dataclass(frozen=True, eq=False)
class StudyResult:
    """
    The outcome of a study.

    Attributes:
        tables (tuple[SummaryTable, ...]): One table per sample size.
        evaluation_points (np.ndarray): The points t.
        asymptotic_mse (np.ndarray): The limit of the scaled MSE at t.
        asymptotic_mise (float): The limit of the scaled MISE.
        e_delta (float): The observation probability E[delta].
        seed (int): The master seed.
    """
    tables: tuple
    evaluation_points: np.ndarray
    asymptotic_mse: np.ndarray
    asymptotic_mise: float
    e_delta: float
    seed: int

    @property
    def resamples(self) -> int:
        """
        Returns the number of resampled replications over all sizes.

        Returns:
            int: The count.
        """
        return sum(table.resamples for table in self.tables)

    def _labels(self) -> list[str]:
        return [f"{t:g}" for t in self.evaluation_points]

    def bias_variance_frame(self) -> pd.DataFrame:
        """
        Returns the scaled bias and variance, one row per sample size.

        Returns:
            pd.DataFrame: Columns n, then bias(t) and var(t) for every t.
        """
        rows = []
        for table in self.tables:
            row = {"n": table.n}
            for label, bias, variance in zip(self._labels(), table.bias,
                                             table.variance):
                row[f"bias({label})"] = bias
                row[f"var({label})"] = variance
            rows.append(row)
        return pd.DataFrame(rows)

    def mse_mise_frame(self) -> pd.DataFrame:
        """
        Returns the scaled MSE and MISE, one row per sample size and a
        last row n = inf with the asymptotic values.

        Returns:
            pd.DataFrame: Columns n, mse(t) for every t and AMISE.
        """
        labels = self._labels()
        rows = []
        for table in self.tables:
            row = {"n": float(table.n)}
            row.update({f"mse({label})": value
                        for label, value in zip(labels, table.mse)})
            row["AMISE"] = table.mise
            rows.append(row)
        row = {"n": math.inf}
        row.update({f"mse({label})": value
                    for label, value in zip(labels, self.asymptotic_mse)})
        row["AMISE"] = self.asymptotic_mise
        rows.append(row)
        return pd.DataFrame(rows)


def replication_stream(seed: int, n: int, k: int,
                       attempt: int = 0) -> np.random.Generator:
    """
    Returns the random stream of attempt number attempt of replication k
    at sample size n. Streams depend only on their key, never on the
    order in which replications run.

    Args:
        seed (int): The master seed.
        n (int): The sample size.
        k (int): The replication index.
        attempt (int): 0 for the first draw, then 1, 2, ... for resamples.

    Returns:
        np.random.Generator: A counter-based generator.
    """
    key = (n, k) if attempt == 0 else (n, k, attempt)
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(seed, spawn_key=key)))


def generate_sample(model: TrueModel, n: int, stream: np.random.Generator
                    ) -> tuple[Dataset, np.ndarray]:
    """
    Draws n rows from the model and returns them with the true errors.
    Responses of rows with delta = 0 are stored as 0.

    Args:
        model (TrueModel): The model.
        n (int): The sample size.
        stream (np.random.Generator): The random stream.

    Returns:
        tuple[Dataset, np.ndarray]: The sample and the errors e_j.

    Raises:
        ValueError: If n < 1.
    """
    if n < 1:
        raise ValueError(f"The sample size must be positive, got {n}.")
    low = np.array([bound[0] for bound in model.bounds])
    high = np.array([bound[1] for bound in model.bounds])
    x = stream.uniform(low, high, size=(n, model.dimension))
    errors = model.law.sample(stream, n)
    delta = (stream.random(n) < model.observation_probability(x)) \
        .astype(np.int8)
    y = model.regression(x) + model.scale(x) * errors
    y = np.where(delta == 1, y, 0.0)
    data = Dataset.from_arrays(x, y, delta, bounds=model.bounds)
    return data, errors


def generate_dataset(model: TrueModel, n: int,
                     stream: np.random.Generator) -> Dataset:
    """
    Draws n rows (x, delta y, delta) from the model.

    Args:
        model (TrueModel): The model.
        n (int): The sample size.
        stream (np.random.Generator): The random stream.

    Returns:
        Dataset: The sample.
    """
    return generate_sample(model, n, stream)[0]


def missingness_summary(model: TrueModel) -> MissingnessSummary:
    """
    Returns E[delta] = E[pi(X)] by two-dimensional quadrature over the
    uniform covariate law.

    Args:
        model (TrueModel): A model with two covariates.

    Returns:
        MissingnessSummary: The observation probability.

    Raises:
        SimulationException: If the model does not have two covariates.
    """
    if model.dimension != 2:
        raise SimulationException(
            "E[delta] by quadrature needs two covariates.")
    (low1, high1), (low2, high2) = model.bounds
    area = (high1 - low1) * (high2 - low2)
    value, _ = integrate.dblquad(
        lambda x2, x1: float(
            model.observation_probability(np.array([[x1, x2]]))[0]),
        low1, high1, low2, high2)
    return MissingnessSummary(e_delta=value / area)


def run_replication(model: TrueModel, n: int, cfg: StudyConfig,
                    k: int) -> ReplicationResult:
    """
    Draws a sample for replication k, estimates the error distribution
    function from its complete cases and evaluates it at the evaluation
    points and on the integration grid. A sample on which the smoother
    fails is replaced by one from the next derived stream.

    Args:
        model (TrueModel): The model.
        n (int): The sample size.
        cfg (StudyConfig): The study settings.
        k (int): The replication index.

    Returns:
        ReplicationResult: The estimate.

    Raises:
        SimulationException: If every allowed sample failed.
    """
    smoother = cfg.smoother_config(n, model.dimension)
    for attempt in range(cfg.max_resamples + 1):
        data = generate_dataset(
            model, n, replication_stream(cfg.seed, n, k, attempt))
        try:
            residuals = complete_case_residuals(data, smoother)
        except (InsufficientDataException, EmptyWindowException) as e:
            logger.info("Replication %s at n=%s resampled: %s", k, n, e)
            continue
        points = edf_curve(residuals, cfg.evaluation_points).values
        grid_values = edf_curve(residuals, cfg.mise_grid).values
        return ReplicationResult(n=n, k=k, points=points,
                                 grid_values=grid_values, resamples=attempt,
                                 clamped=residuals.clamp_count)
    raise SimulationException(
        f"Replication {k} at n={n} failed after {cfg.max_resamples} "
        "resamples.")


def summarize(results: Iterable[ReplicationResult], model: TrueModel,
              cfg: StudyConfig) -> SummaryTable:
    """
    Computes the scaled bias, variance, MSE and MISE of the replications
    of one sample size.

    Args:
        results (Iterable[ReplicationResult]): The replications.
        model (TrueModel): The model providing the true F.
        cfg (StudyConfig): The study settings.

    Returns:
        SummaryTable: The statistics.

    Raises:
        SimulationException: If there are fewer than two replications or
            they mix sample sizes.
    """
    results = sorted(results, key=lambda result: result.k)
    if len(results) < 2:
        raise SimulationException("At least two replications are required.")
    sizes = {result.n for result in results}
    if len(sizes) != 1:
        raise SimulationException(
            f"Replications mix sample sizes {sorted(sizes)}.")
    n = sizes.pop()

    points = np.asarray(cfg.evaluation_points, dtype=float)
    grid = cfg.mise_grid
    estimates = np.vstack([result.points for result in results])
    grid_estimates = np.vstack([result.grid_values for result in results])
    truth = np.asarray(model.law.cdf(points), dtype=float)
    grid_truth = np.asarray(model.law.cdf(grid), dtype=float)

    grid_mse = n * np.mean((grid_estimates - grid_truth) ** 2, axis=0)
    mise = float(integrate.trapezoid(grid_mse, grid)) if len(grid) > 1 \
        else 0.0
    return SummaryTable(
        n=n,
        evaluation_points=points,
        bias=math.sqrt(n) * (estimates.mean(axis=0) - truth),
        variance=n * estimates.var(axis=0, ddof=1),
        mse=n * np.mean((estimates - truth) ** 2, axis=0),
        mise=mise,
        replications=len(results),
        seed=cfg.seed,
        resamples=sum(result.resamples > 0 for result in results),
        clamped=sum(result.clamped for result in results))


def _replication_task(args: tuple) -> ReplicationResult:
    return run_replication(*args)


def _run_size(model: TrueModel, n: int, cfg: StudyConfig,
              executor: Optional[ProcessPoolExecutor]
              ) -> list[ReplicationResult]:
    tasks = [(model, n, cfg, k) for k in range(cfg.replications)]
    if executor is None:
        return [_replication_task(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * cfg.workers))
    return list(executor.map(_replication_task, tasks, chunksize=chunksize))


def run_study(cfg: StudyConfig, model: Optional[TrueModel] = None
              ) -> StudyResult:
    """
    Runs every replication at every sample size, summarizes them and adds
    the asymptotic row from the influence function with E[delta] computed
    by quadrature.

    Args:
        cfg (StudyConfig): The study settings.
        model (Optional[TrueModel]): The model; defaults to TrueModel().

    Returns:
        StudyResult: The tables.

    Raises:
        SimulationException: If a replication fails or R < 2.
    """
    model = model if model is not None else TrueModel()
    executor = ProcessPoolExecutor(max_workers=cfg.workers) \
        if cfg.workers > 1 else None
    tables = []
    try:
        for n in cfg.sample_sizes:
            logger.info("Running %s replications at n=%s.",
                        cfg.replications, n)
            results = _run_size(model, n, cfg, executor)
            table = summarize(results, model, cfg)
            if table.resamples:
                logger.info("%s replications at n=%s were resampled.",
                            table.resamples, n)
            if table.clamped:
                logger.info("%s scale fits at n=%s were clamped at the "
                            "variance floor.", table.clamped, n)
            tables.append(table)
    finally:
        if executor is not None:
            executor.shutdown()

    miss = missingness_summary(model)
    points = np.asarray(cfg.evaluation_points, dtype=float)
    return StudyResult(
        tables=tuple(tables),
        evaluation_points=points,
        asymptotic_mse=amse_curve(model.law, miss, points),
        asymptotic_mise=amise(model.law, miss, cfg.mise_grid),
        e_delta=miss.e_delta,
        seed=cfg.seed)
