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
This module defines the multivariate local polynomial smoother used to
estimate the conditional moments r(x) = E(Y|X=x) and r2(x) = E(Y^2|X=x)
from the complete cases of a sample, and the derived scale estimate.

Classes
-------

- MultiIndex:
    A multi-index (i_1, ..., i_m) of a monomial basis function.
- KernelSpec:
    The product kernel, one compactly supported density per coordinate.
- SmootherConfig:
    Everything defining a local polynomial fit.
- Dataset:
    The observed sample (X_j, delta_j Y_j, delta_j).
- FitDiagnostics:
    Information about how a single local fit was obtained.

Functions
---------

- multi_index_set:
    The basis multi-indices of total order <= d, zero index first.
- psi:
    Evaluates the scaled monomial of a multi-index.
- kernel_weight:
    Evaluates the product kernel at an offset for a bandwidth.
- bandwidth_rule:
    The default bandwidth 3 (n log n)^(-1/7).
- wls_solve:
    Weighted least squares with a minimum-norm fallback.
- fit_conditional_moment:
    Local polynomial estimate of E(Y^a | X = x0).
- fit_moments:
    Joint estimate of E(Y | X = x0) and E(Y^2 | X = x0).
- fit_location_scale:
    Joint estimate of r(x0) and sigma(x0).
- estimate_sigma:
    Local polynomial estimate of the scale function at x0.

Usage
-----

- Estimate the regression and scale functions at a point:
    .. code-block:: python

        data = Dataset.from_arrays(x, y, delta)
        cfg = SmootherConfig(dimension=2, degree=3,
                             bandwidth=bandwidth_rule(data.n))
        r_hat, diagnostics = fit_conditional_moment(data, x0, cfg, 1)
        sigma_hat, diagnostics = estimate_sigma(data, x0, cfg)
"""

__all__ = ["MultiIndex", "KernelSpec", "SmootherConfig", "Dataset",
           "FitDiagnostics", "multi_index_set", "psi", "kernel_weight",
           "bandwidth_rule", "wls_solve", "fit_conditional_moment",
           "fit_moments", "fit_location_scale", "estimate_sigma"]

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from ..exceptions import DimensionMismatchException, EmptyWindowException, \
    InsufficientDataException
from ..utils import get_logger


logger = get_logger()

ESCALATION_FACTOR = 1.5
"(float): Multiplicative bandwidth step for empty or singular windows."


def _tricube(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0,
                    (70.0 / 81.0) * (1.0 - np.abs(u) ** 3) ** 3, 0.0)


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u ** 2), 0.0)


def _biweight(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0,
                    (15.0 / 16.0) * (1.0 - u ** 2) ** 2, 0.0)


def _uniform(u: np.ndarray) -> np.ndarray:
    return np.where(np.abs(u) <= 1.0, 0.5, 0.0)


KERNEL_DENSITIES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tricube": _tricube,
    "epanechnikov": _epanechnikov,
    "biweight": _biweight,
    "uniform": _uniform,
}
"(dict): Supported coordinate densities on [-1, 1]."


@dataclass(frozen=True)
class MultiIndex:
    """
    A multi-index (i_1, ..., i_m) of nonnegative integers.

    Attributes:
        entries (tuple[int, ...]): The exponents per coordinate.
    """
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(i < 0 for i in self.entries):
            raise ValueError(
                f"Multi-index entries must be nonnegative: {self.entries}")

    @property
    def order(self) -> int:
        """
        Returns the total order i_1 + ... + i_m.

        Returns:
            int: The order.
        """
        return sum(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@lru_cache(maxsize=None)
def multi_index_set(m: int, d: int) -> tuple[MultiIndex, ...]:
    """
    Returns every multi-index of dimension m with order at most d, in
    graded lexicographic order. The zero index is always first.

    Args:
        m (int): The covariate dimension, at least 1.
        d (int): The polynomial degree, at least 0.

    Returns:
        tuple[MultiIndex, ...]: The ordered basis indices.

    Raises:
        ValueError: If m < 1 or d < 0.
    """
    if m < 1 or d < 0:
        raise ValueError(f"Invalid basis parameters m={m}, d={d}.")
    candidates = [entries for entries in
                  itertools.product(range(d + 1), repeat=m)
                  if sum(entries) <= d]
    candidates.sort(key=lambda entries: (sum(entries),
                                         tuple(-i for i in entries)))
    return tuple(MultiIndex(entries) for entries in candidates)


@lru_cache(maxsize=None)
def _basis_arrays(m: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns the exponent matrix and the factorial denominators of the
    basis of dimension m and degree d.
    """
    basis = multi_index_set(m, d)
    assert basis[0].order == 0, "Zero multi-index must come first."
    exponents = np.array([index.entries for index in basis], dtype=int)
    denominators = np.array(
        [math.prod(math.factorial(i) for i in index.entries)
         for index in basis], dtype=float)
    exponents.setflags(write=False)
    denominators.setflags(write=False)
    return exponents, denominators


def psi(i: MultiIndex, u: Sequence[float]) -> float:
    """
    Evaluates psi_i(u) = prod_k u_k^(i_k) / i_k!.

    Args:
        i (MultiIndex): The multi-index.
        u (Sequence[float]): The point.

    Returns:
        float: The value of the scaled monomial.

    Raises:
        DimensionMismatchException: If the lengths of i and u differ.
    """
    u = np.asarray(u, dtype=float).ravel()
    if len(u) != len(i):
        raise DimensionMismatchException(len(i), len(u))
    value = 1.0
    for u_k, i_k in zip(u, i.entries):
        value *= u_k ** i_k / math.factorial(i_k)
    return float(value)


def _design_matrix(scaled_offsets: np.ndarray, degree: int) -> np.ndarray:
    """
    Returns the matrix with entries psi_i(u_j) for rows u_j of
    scaled_offsets and columns i of the degree-d basis.
    """
    exponents, denominators = _basis_arrays(scaled_offsets.shape[1], degree)
    powers = scaled_offsets[:, None, :] ** exponents[None, :, :]
    return np.prod(powers, axis=2) / denominators


@dataclass(frozen=True)
class KernelSpec:
    """
    The product kernel w(u) = w_1(u_1) ... w_m(u_m).

    Attributes:
        densities (tuple[str, ...]): Coordinate density names. A single
            name is used for every coordinate.
    """
    densities: tuple[str, ...] = ("tricube",)

    def __post_init__(self) -> None:
        if not self.densities:
            raise ValueError("At least one kernel density is required.")
        for name in self.densities:
            if name not in KERNEL_DENSITIES:
                raise ValueError(
                    f"Unknown kernel density \"{name}\". Accepted values "
                    "are: " + ", ".join(KERNEL_DENSITIES))

    def weights(self, scaled_offsets: np.ndarray) -> np.ndarray:
        """
        Evaluates the product kernel at each row of scaled offsets.

        Args:
            scaled_offsets (np.ndarray): Array of shape (k, m) holding
                (X_j - x) / lambda.

        Returns:
            np.ndarray: The k nonnegative weights.

        Raises:
            DimensionMismatchException: If the number of densities is
                neither 1 nor m.
        """
        m = scaled_offsets.shape[1]
        if len(self.densities) == 1:
            names = self.densities * m
        elif len(self.densities) == m:
            names = self.densities
        else:
            raise DimensionMismatchException(m, len(self.densities))
        result = np.ones(scaled_offsets.shape[0])
        for k, name in enumerate(names):
            result *= KERNEL_DENSITIES[name](scaled_offsets[:, k])
        return result


@dataclass(frozen=True)
class SmootherConfig:
    """
    Everything defining a local polynomial fit.

    Attributes:
        dimension (int): The covariate dimension m.
        degree (int): The polynomial degree d.
        bandwidth (float): The bandwidth lambda, in covariate units.
        kernel (KernelSpec): The product kernel.
        variance_floor (float): Lower bound for r2 - r^2.
        escalation_cap (float): Largest bandwidth tried, as a multiple
            of the configured bandwidth.
    """
    dimension: int
    degree: int
    bandwidth: float
    kernel: KernelSpec = field(default_factory=KernelSpec)
    variance_floor: float = 1e-6
    escalation_cap: float = 4.0

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("The dimension must be positive.")
        if self.degree < 0:
            raise ValueError("The degree must be nonnegative.")
        if not self.bandwidth > 0:
            raise ValueError("The bandwidth must be positive.")
        if not self.variance_floor > 0:
            raise ValueError("The variance floor must be positive.")
        if self.escalation_cap < 1:
            raise ValueError("The escalation cap must be at least 1.")

    @property
    def basis_size(self) -> int:
        """
        Returns the number of basis functions, binomial(m + d, d).

        Returns:
            int: The basis size.
        """
        return math.comb(self.dimension + self.degree, self.degree)


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    The observed sample (X_j, delta_j Y_j, delta_j). Estimators only
    read the rows with delta_j = 1, through complete_cases().

    Attributes:
        x (np.ndarray): Covariates, shape (n, m).
        y (np.ndarray): Responses, shape (n,).
        delta (np.ndarray): Observation indicators in {0, 1}, shape (n,).
        bounds (np.ndarray): Per-coordinate domain interval, shape (m, 2).
    """
    x: np.ndarray
    y: np.ndarray
    delta: np.ndarray
    bounds: np.ndarray

    @staticmethod
    def from_arrays(x, y, delta,
                    bounds: Optional[Sequence[Sequence[float]]] = None
                    ) -> "Dataset":
        """
        Creates a read-only Dataset from array-likes.

        Args:
            x: Covariates, shape (n, m) or (n,) for m = 1.
            y: Responses, shape (n,).
            delta: Observation indicators, shape (n,).
            bounds: Per-coordinate intervals. Defaults to the range of x.

        Returns:
            Dataset: The dataset.

        Raises:
            ValueError: If the shapes disagree or delta is not binary.
        """
        x = np.array(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(y, dtype=float).ravel()
        delta = np.array(delta).ravel()
        if x.ndim != 2 or len(x) != len(y) or len(y) != len(delta):
            raise ValueError("x, y and delta must have the same length.")
        if not np.isin(delta, (0, 1)).all():
            raise ValueError("delta must only contain 0 and 1.")
        delta = delta.astype(np.int8)
        if bounds is None:
            if len(x) > 0:
                bounds = np.column_stack([x.min(axis=0), x.max(axis=0)])
            else:
                bounds = np.zeros((x.shape[1], 2))
        bounds = np.array(bounds, dtype=float).reshape(x.shape[1], 2)
        for array in (x, y, delta, bounds):
            array.setflags(write=False)
        return Dataset(x=x, y=y, delta=delta, bounds=bounds)

    @property
    def n(self) -> int:
        """
        Returns the sample size n.

        Returns:
            int: The number of rows.
        """
        return len(self.y)

    @property
    def N(self) -> int:  # pylint: disable=invalid-name
        """
        Returns the number of complete cases N = sum delta_j.

        Returns:
            int: The number of rows with delta = 1.
        """
        return int(self.delta.sum())

    @property
    def dimension(self) -> int:
        """
        Returns the covariate dimension m.

        Returns:
            int: The number of covariate columns.
        """
        return self.x.shape[1]

    def complete_cases(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Returns the covariates and responses of the rows with delta = 1,
        sorted lexicographically on (x_1, ..., x_m, y). The fixed order
        makes every fit independent of the row order of the sample.

        Returns:
            tuple[np.ndarray, np.ndarray]: (x_c, y_c) of shapes (N, m)
                and (N,).
        """
        mask = self.delta == 1
        x_c, y_c = self.x[mask], self.y[mask]
        # lexsort sorts by the last key first
        order = np.lexsort((y_c,) + tuple(x_c.T[::-1]))
        return x_c[order], y_c[order]


@dataclass(frozen=True)
class FitDiagnostics:
    """
    Information about how a local fit was obtained.

    Attributes:
        effective_count (int): Rows with positive kernel weight.
        rank_deficient (bool): True if the minimum-norm fallback was used.
        bandwidth (float): The bandwidth actually used.
        escalations (int): Number of bandwidth escalation steps, for
            empty or singular windows and for variance estimates below
            the floor.
        clamped (bool): True if the variance floor was applied.
    """
    effective_count: int
    rank_deficient: bool
    bandwidth: float
    escalations: int = 0
    clamped: bool = False


def kernel_weight(kernel: KernelSpec, u: Sequence[float],
                  bandwidth: float) -> float:
    """
    Evaluates prod_k w_k(u_k / lambda).

    Args:
        kernel (KernelSpec): The product kernel.
        u (Sequence[float]): The offset X_j - x.
        bandwidth (float): The bandwidth lambda.

    Returns:
        float: The nonnegative weight, 0 outside the support.

    Raises:
        ValueError: If the bandwidth is not positive.
    """
    if not bandwidth > 0:
        raise ValueError("The bandwidth must be positive.")
    scaled = np.asarray(u, dtype=float).reshape(1, -1) / bandwidth
    return float(kernel.weights(scaled)[0])


def bandwidth_rule(n: int) -> float:
    """
    Returns the bandwidth 3 (n log n)^(-1/7).

    Args:
        n (int): The sample size, at least 2.

    Returns:
        float: The bandwidth.

    Raises:
        ValueError: If n < 2.
    """
    if n < 2:
        raise ValueError(f"The bandwidth rule needs n >= 2, got {n}.")
    return 3.0 * (n * math.log(n)) ** (-1.0 / 7.0)


def wls_solve(rows, weights, targets) -> tuple[np.ndarray, bool]:
    """
    Minimizes sum_j w_j (target_j - row_j^T gamma)^2 with a singular
    value decomposition of the weighted design. Singular values below
    sqrt(eps) times the largest one are treated as zero, which yields
    the minimum-norm minimizer for a rank-deficient design.

    Args:
        rows: The design rows, shape (k, p).
        weights: The nonnegative weights, shape (k,).
        targets: The targets, shape (k,) or (k, q) for q right-hand sides.

    Returns:
        tuple[np.ndarray, bool]: The coefficients, shape (p,) or (p, q),
            and True if the design was rank-deficient.

    Raises:
        ValueError: If the lengths disagree or a weight is negative.
        EmptyWindowException: If all weights are zero.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    weights = np.asarray(weights, dtype=float).ravel()
    targets = np.asarray(targets, dtype=float)
    if len(rows) != len(weights) or len(weights) != len(targets):
        raise ValueError("rows, weights and targets must have equal length.")
    if (weights < 0).any():
        raise ValueError("Weights must be nonnegative.")
    active = weights > 0
    if not active.any():
        raise EmptyWindowException("All weights are zero: empty window.")

    root = np.sqrt(weights[active])
    design = rows[active] * root[:, None]
    if targets.ndim == 1:
        rhs = targets[active] * root
    else:
        rhs = targets[active] * root[:, None]

    u, s, vt = np.linalg.svd(design, full_matrices=False)
    tol = np.sqrt(np.finfo(float).eps) * (s.max() if s.size else 0.0)
    keep = s > tol
    rank = int(keep.sum())
    projected = u[:, keep].T @ rhs
    if projected.ndim == 1:
        coefficients = vt[keep].T @ (projected / s[keep])
    else:
        coefficients = vt[keep].T @ (projected / s[keep][:, None])
    return coefficients, rank < rows.shape[1]


def _escalating_fits(x_c: np.ndarray, targets: np.ndarray, x0: np.ndarray,
                     cfg: SmootherConfig
                     ) -> Iterator[tuple[np.ndarray, FitDiagnostics]]:
    """
    Yields the fit of every nonempty window along the bandwidth path
    lambda, 1.5 lambda, ... up to escalation_cap * lambda.
    """
    cap = cfg.bandwidth * cfg.escalation_cap * (1.0 + 1e-12)
    bandwidth = cfg.bandwidth
    escalations = 0
    while True:
        scaled = (x_c - x0) / bandwidth
        weights = cfg.kernel.weights(scaled)
        active = weights > 0
        if active.any():
            design = _design_matrix(scaled[active], cfg.degree)
            coefficients, deficient = wls_solve(
                design, weights[active], targets[active])
            yield coefficients[0], FitDiagnostics(
                effective_count=int(active.sum()),
                rank_deficient=deficient,
                bandwidth=bandwidth,
                escalations=escalations)
        if bandwidth * ESCALATION_FACTOR > cap:
            return
        bandwidth *= ESCALATION_FACTOR
        escalations += 1


def _local_fit(x_c: np.ndarray, targets: np.ndarray, x0: np.ndarray,
               cfg: SmootherConfig,
               accept: Optional[Callable[[np.ndarray], bool]] = None
               ) -> tuple[np.ndarray, FitDiagnostics]:
    """
    Fits the local polynomial at x0 to the given complete-case targets,
    escalating the bandwidth on empty or singular windows and on fits
    rejected by accept. Past the cap, the widest window is returned.

    Returns:
        tuple[np.ndarray, FitDiagnostics]: The constant-term coefficient
            for every target column and the diagnostics.

    Raises:
        InsufficientDataException: If every window up to the cap is empty.
    """
    last = None
    for coefficients, diagnostics in _escalating_fits(x_c, targets, x0,
                                                      cfg):
        last = (coefficients, diagnostics)
        if not diagnostics.rank_deficient and \
                (accept is None or accept(coefficients)):
            return last

    if last is None:
        raise InsufficientDataException(
            f"No complete case within bandwidth "
            f"{cfg.bandwidth * cfg.escalation_cap:.6g} of {x0.tolist()}.")
    if last[1].rank_deficient:
        logger.debug("Minimum-norm fallback at %s with bandwidth %.6g.",
                     x0.tolist(), last[1].bandwidth)
    return last


def _prepare(data: Dataset, x0: Sequence[float], cfg: SmootherConfig
             ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x0 = np.asarray(x0, dtype=float).ravel()
    if len(x0) != data.dimension:
        raise DimensionMismatchException(data.dimension, len(x0))
    if cfg.dimension != data.dimension:
        raise DimensionMismatchException(cfg.dimension, data.dimension)
    x_c, y_c = data.complete_cases()
    if len(y_c) == 0:
        raise InsufficientDataException("The dataset has no complete case.")
    return x_c, y_c, x0


def fit_conditional_moment(data: Dataset, x0: Sequence[float],
                           cfg: SmootherConfig, a: int
                           ) -> tuple[float, FitDiagnostics]:
    """
    Returns the local polynomial estimate of E(Y^a | X = x0), i.e. the
    constant-term coefficient of the kernel weighted fit over the
    complete cases.

    Args:
        data (Dataset): The sample.
        x0 (Sequence[float]): The evaluation point.
        cfg (SmootherConfig): The smoother configuration.
        a (int): The power of the response, 1 or 2.

    Returns:
        tuple[float, FitDiagnostics]: The estimate and its diagnostics.

    Raises:
        ValueError: If a is not 1 or 2.
        DimensionMismatchException: If x0 or cfg do not match the data.
        InsufficientDataException: If no complete case can be used.
    """
    if a not in (1, 2):
        raise ValueError(f"The power must be 1 or 2, got {a}.")
    x_c, y_c, x0 = _prepare(data, x0, cfg)
    estimate, diagnostics = _local_fit(x_c, y_c ** a, x0, cfg)
    return float(estimate), diagnostics


def fit_moments(data: Dataset, x0: Sequence[float], cfg: SmootherConfig
                ) -> tuple[float, float, FitDiagnostics]:
    """
    Returns the estimates of E(Y | X = x0) and E(Y^2 | X = x0) from one
    shared window.

    Args:
        data (Dataset): The sample.
        x0 (Sequence[float]): The evaluation point.
        cfg (SmootherConfig): The smoother configuration.

    Returns:
        tuple[float, float, FitDiagnostics]: r_hat, r2_hat, diagnostics.

    Raises:
        DimensionMismatchException: If x0 or cfg do not match the data.
        InsufficientDataException: If no complete case can be used.
    """
    x_c, y_c, x0 = _prepare(data, x0, cfg)
    estimates, diagnostics = _local_fit(
        x_c, np.column_stack([y_c, y_c ** 2]), x0, cfg)
    return float(estimates[0]), float(estimates[1]), diagnostics


def fit_location_scale(data: Dataset, x0: Sequence[float],
                       cfg: SmootherConfig
                       ) -> tuple[float, float, FitDiagnostics]:
    """
    Returns r_hat(x0) and sigma_hat(x0) from one shared window. A window
    whose variance estimate r2_hat - r_hat^2 falls below variance_floor
    is widened along the same 1.5 escalation path as an empty or
    singular one. Only when the widest window is still below the floor
    is the variance clamped to it.

    Args:
        data (Dataset): The sample.
        x0 (Sequence[float]): The evaluation point.
        cfg (SmootherConfig): The smoother configuration.

    Returns:
        tuple[float, float, FitDiagnostics]: r_hat, sigma_hat and the
            diagnostics, with clamped set if the floor was applied.

    Raises:
        DimensionMismatchException: If x0 or cfg do not match the data.
        InsufficientDataException: If no complete case can be used.
    """
    x_c, y_c, x0 = _prepare(data, x0, cfg)
    estimates, diagnostics = _local_fit(
        x_c, np.column_stack([y_c, y_c ** 2]), x0, cfg,
        accept=lambda c: c[1] - c[0] ** 2 >= cfg.variance_floor)
    r_hat, r2_hat = float(estimates[0]), float(estimates[1])
    variance = r2_hat - r_hat ** 2
    if variance < cfg.variance_floor:
        logger.debug("Variance estimate %.6g at %s clamped to %.6g.",
                     variance, x0.tolist(), cfg.variance_floor)
        diagnostics = replace(diagnostics, clamped=True)
        variance = cfg.variance_floor
    return r_hat, math.sqrt(variance), diagnostics


def estimate_sigma(data: Dataset, x0: Sequence[float], cfg: SmootherConfig
                   ) -> tuple[float, FitDiagnostics]:
    """
    Returns sqrt(max(r2_hat(x0) - r_hat(x0)^2, variance_floor)).

    Args:
        data (Dataset): The sample.
        x0 (Sequence[float]): The evaluation point.
        cfg (SmootherConfig): The smoother configuration.

    Returns:
        tuple[float, FitDiagnostics]: The positive scale estimate and the
            diagnostics, with clamped set if the floor was applied.

    Raises:
        DimensionMismatchException: If x0 or cfg do not match the data.
        InsufficientDataException: If no complete case can be used.
    """
    _, sigma_hat, diagnostics = fit_location_scale(data, x0, cfg)
    return sigma_hat, diagnostics
