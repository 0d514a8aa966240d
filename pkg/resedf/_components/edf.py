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
This module builds the complete case residuals
(Y_j - r_hat(X_j)) / sigma_hat(X_j) and their empirical distribution
function, together with the linear expansion the estimator is compared
against.

Classes
-------

- ResidualSet:
    The residuals of the complete cases and the smoother diagnostics.
- EdfCurve:
    An empirical distribution function evaluated on a grid.

Functions
---------

- complete_case_residuals:
    Fits the smoothers and standardizes the complete case responses.
- edf_evaluate:
    The fraction of residuals <= t.
- edf_curve:
    edf_evaluate on a grid.
- expansion_oracle / expansion_curve:
    The asymptotic linearization of the estimator at t / on a grid.
- smoother_linearization:
    The averages the integrated smoother errors are equivalent to.
- sup_distance:
    The largest absolute difference of two curves on a common grid.

Usage
-----

- Estimate the error distribution function:
    .. code-block:: python

        residuals = complete_case_residuals(data, cfg)
        curve = edf_curve(residuals, np.arange(-5, 5.005, 0.01))
"""

__all__ = ["ResidualSet", "EdfCurve", "complete_case_residuals",
           "edf_evaluate", "edf_curve", "expansion_oracle",
           "expansion_curve", "smoother_linearization", "sup_distance"]

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .localpoly import Dataset, SmootherConfig, fit_location_scale
from .efficiency import ErrorLaw
from ..exceptions import GridException, InsufficientDataException
from ..utils import get_logger


logger = get_logger()


@dataclass(frozen=True, eq=False)
class ResidualSet:
    """
    The standardized residuals of the complete cases.

    Attributes:
        values (np.ndarray): One residual per complete case, sorted.
        n (int): The sample size of the source dataset.
        r_hat (np.ndarray): The fitted regression at the complete cases,
            in the order of Dataset.complete_cases().
        sigma_hat (np.ndarray): The fitted scale at the complete cases,
            in the order of Dataset.complete_cases().
        clamp_count (int): Fits where the variance floor was applied.
        rank_fallback_count (int): Fits that used the minimum-norm solution.
        escalation_count (int): Total bandwidth escalation steps.
    """
    values: np.ndarray
    n: int
    r_hat: Optional[np.ndarray] = None
    sigma_hat: Optional[np.ndarray] = None
    clamp_count: int = 0
    rank_fallback_count: int = 0
    escalation_count: int = 0

    def __post_init__(self) -> None:
        values = np.sort(np.asarray(self.values, dtype=float).ravel())
        if len(values) == 0:
            raise InsufficientDataException("A residual set cannot be empty.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:  # pylint: disable=invalid-name
        """
        Returns the number of complete cases.

        Returns:
            int: The number of residuals.
        """
        return len(self.values)

    def diagnostics(self) -> dict:
        """
        Returns the counts describing the residual construction.

        Returns:
            dict: n, N and the clamp, rank fallback and escalation counts.
        """
        return {
            "n": self.n,
            "N": self.N,
            "clamped": self.clamp_count,
            "rank_fallbacks": self.rank_fallback_count,
            "escalations": self.escalation_count,
        }


@dataclass(frozen=True, eq=False)
class EdfCurve:
    """
    Values of a distribution function estimate on a strictly increasing
    grid. Curves from edf_curve are nondecreasing with values in [0, 1].

    Attributes:
        grid (np.ndarray): The points t.
        values (np.ndarray): The values at the points.
    """
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid",
                           np.asarray(self.grid, dtype=float).ravel())
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float).ravel())
        if self.grid.shape != self.values.shape:
            raise GridException("Grid and values must have the same shape.")

    def __len__(self) -> int:
        return len(self.grid)


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if not (np.diff(grid) > 0).all():
        raise GridException("The grid must be strictly increasing.")
    return grid


def complete_case_residuals(data: Dataset, cfg: SmootherConfig
                            ) -> ResidualSet:
    """
    Fits r_hat and sigma_hat on the complete cases of the dataset and
    returns (Y_j - r_hat(X_j)) / sigma_hat(X_j) for every row with
    delta_j = 1. Rows with delta_j = 0 are never read.

    Args:
        data (Dataset): The sample.
        cfg (SmootherConfig): The smoother configuration.

    Returns:
        ResidualSet: The residuals and diagnostics.

    Raises:
        InsufficientDataException: If there is no complete case or a
            window stays empty.
        DimensionMismatchException: If cfg does not match the data.
    """
    x_c, y_c = data.complete_cases()
    if len(y_c) == 0:
        raise InsufficientDataException("The dataset has no complete case.")

    r_hat = np.empty(len(y_c))
    sigma_hat = np.empty(len(y_c))
    clamped = fallbacks = escalations = 0
    for j, x0 in enumerate(x_c):
        r_hat[j], sigma_hat[j], diagnostics = \
            fit_location_scale(data, x0, cfg)
        clamped += diagnostics.clamped
        fallbacks += diagnostics.rank_deficient
        escalations += diagnostics.escalations

    if clamped or fallbacks:
        logger.debug("Residuals: %s clamped fits, %s rank fallbacks.",
                     clamped, fallbacks)
    values = (y_c - r_hat) / sigma_hat
    for array in (r_hat, sigma_hat):
        array.setflags(write=False)
    return ResidualSet(values=values, n=data.n, r_hat=r_hat,
                       sigma_hat=sigma_hat, clamp_count=clamped,
                       rank_fallback_count=fallbacks,
                       escalation_count=escalations)


def edf_evaluate(res: ResidualSet, t: float) -> float:
    """
    Returns (1/N) #{residuals <= t}.

    Args:
        res (ResidualSet): The residuals.
        t (float): The point.

    Returns:
        float: A value in [0, 1].
    """
    return float(np.searchsorted(res.values, t, side="right")) / res.N


def edf_curve(res: ResidualSet, grid: Sequence[float]) -> EdfCurve:
    """
    Evaluates the empirical distribution function of the residuals on a
    grid.

    Args:
        res (ResidualSet): The residuals.
        grid (Sequence[float]): Strictly increasing points.

    Returns:
        EdfCurve: The curve.

    Raises:
        GridException: If the grid is not strictly increasing.
    """
    grid = _check_grid(grid)
    counts = np.searchsorted(res.values, grid, side="right")
    return EdfCurve(grid=grid, values=counts / res.N)


def _observed_errors(errors, deltas) -> np.ndarray:
    errors = np.asarray(errors, dtype=float).ravel()
    deltas = np.asarray(deltas).ravel()
    if errors.shape != deltas.shape:
        raise ValueError("errors and deltas must have the same length.")
    observed = errors[deltas == 1]
    if len(observed) == 0:
        raise InsufficientDataException("No observed error.")
    return observed


def expansion_curve(errors, deltas, law: ErrorLaw,
                    grid: Sequence[float]) -> EdfCurve:
    """
    Returns, at every grid point t,
    (1/N) sum delta_j [1[e_j <= t] + f(t) {e_j + (t/2)(e_j^2 - 1)}].

    Args:
        errors: The true errors e_j.
        deltas: The observation indicators.
        law (ErrorLaw): The error law providing f.
        grid (Sequence[float]): Strictly increasing points.

    Returns:
        EdfCurve: The linearization; its values need not lie in [0, 1].

    Raises:
        InsufficientDataException: If every delta is 0.
        GridException: If the grid is not strictly increasing.
    """
    grid = _check_grid(grid)
    observed = np.sort(_observed_errors(errors, deltas))
    count = len(observed)
    edf = np.searchsorted(observed, grid, side="right") / count
    mean, half_second = smoother_linearization(observed, np.ones(count))
    density = np.asarray(law.pdf(grid), dtype=float)
    return EdfCurve(grid=grid,
                    values=edf + density * (mean + grid * half_second))


def expansion_oracle(errors, deltas, law: ErrorLaw, t: float) -> float:
    """
    Returns (1/N) sum delta_j [1[e_j <= t] + f(t) {e_j + (t/2)(e_j^2 - 1)}].

    Args:
        errors: The true errors e_j.
        deltas: The observation indicators.
        law (ErrorLaw): The error law providing f.
        t (float): The point.

    Returns:
        float: The linearization at t.

    Raises:
        InsufficientDataException: If every delta is 0.
    """
    return float(expansion_curve(errors, deltas, law, [t]).values[0])


def smoother_linearization(errors, deltas) -> tuple[float, float]:
    """
    Returns the complete case averages (1/N) sum delta_j e_j and
    (1/N) sum delta_j (e_j^2 - 1) / 2, to which the integrated errors of
    r_hat and sigma_hat, standardized by sigma, are asymptotically
    equivalent.

    Args:
        errors: The true errors e_j.
        deltas: The observation indicators.

    Returns:
        tuple[float, float]: The location and scale averages.

    Raises:
        InsufficientDataException: If every delta is 0.
    """
    observed = _observed_errors(errors, deltas)
    return float(observed.mean()), float(0.5 * (observed ** 2 - 1.0).mean())


def sup_distance(curve_a: EdfCurve, curve_b: EdfCurve) -> float:
    """
    Returns max |A(t) - B(t)| over the common grid.

    Args:
        curve_a (EdfCurve): The first curve.
        curve_b (EdfCurve): The second curve.

    Returns:
        float: The distance, 0 for empty curves.

    Raises:
        GridException: If the grids differ.
    """
    if curve_a.grid.shape != curve_b.grid.shape \
            or not np.array_equal(curve_a.grid, curve_b.grid):
        raise GridException("The curves are defined on different grids.")
    if len(curve_a) == 0:
        return 0.0
    return float(np.max(np.abs(curve_a.values - curve_b.values)))
