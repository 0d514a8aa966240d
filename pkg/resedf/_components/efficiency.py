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
This module implements the efficiency calculus for linear functionals
E[h(e)] of the error law in the heteroskedastic regression model with
responses missing at random: location and scale scores, the projection
h0 of h, the efficient influence function and the asymptotic variance
of the complete case error distribution function estimator.

All expectations are computed by adaptive quadrature over the error law.

Classes
-------

- ErrorLaw:
    The error distribution (density, CDF, density derivative, moments).
- MissingnessSummary:
    The observation probability E[delta].
- Indicator:
    The function z -> 1[z <= t], with its breakpoint.
- ProjectedFunction:
    The projection h0 of a function h.
- GradientComponents:
    The scores, l0, ld and the matrix J_d^-1 of an error law.
- EfficientInfluence:
    The efficient influence function for E[h(e)].

Functions
---------

- quadrature:
    Adaptive Gauss-Kronrod integration with convergence checking.
- score_location / score_scale:
    The location and scale scores of the error law.
- jd_inverse:
    The inverse information matrix J_d^-1.
- l0 / ld:
    The vector functions l0 and ld.
- h0_projection:
    The projection h0 of h.
- influence_F:
    The influence function of the estimator of F(t).
- efficient_influence_general:
    The efficient influence function for E[h(e)].
- canonical_gradient:
    The pair (s*, k*) characterizing the canonical gradient.
- asymptotic_variance_F / amse_curve / amise:
    The asymptotic mean squared error at t, on a grid and integrated.
- efficient_variance_general:
    The efficiency bound for E[h(e)].
- fisher_information:
    Fisher information for location and scale.

Usage
-----

- Asymptotic mean squared error of the estimator at t = 0:
    .. code-block:: python

        law = ErrorLaw.standard_normal()
        miss = MissingnessSummary(e_delta=0.5)
        asymptotic_variance_F(law, miss, 0.0)

- Efficient influence function for E[h(e)]:
    .. code-block:: python

        phi = efficient_influence_general(law, miss, Indicator(0.0))
        phi(1, 0.5)
"""

__all__ = ["ErrorLaw", "MissingnessSummary", "Indicator",
           "ProjectedFunction", "GradientComponents", "EfficientInfluence",
           "quadrature", "score_location", "score_scale", "jd_inverse",
           "l0", "ld", "h0_projection", "influence_F",
           "efficient_influence_general", "canonical_gradient",
           "asymptotic_variance_F", "amse_curve", "amise",
           "efficient_variance_general", "fisher_information",
           "gradient_components"]

import math
import warnings
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special

from ..exceptions import ErrorLawException, DegenerateMomentsException, \
    QuadratureException, GridException
from ..utils import get_logger, DEFAULT_QUADRATURE_DOMAIN, \
    DEFAULT_QUADRATURE_TOL


logger = get_logger()

MOMENT_TOL = 1e-6
"(float): Tolerance for the mean zero and unit variance checks."

QUADRATURE_LIMIT = 200
"(int): Maximum number of subintervals of the adaptive quadrature."

PROJECTION_TOL = 1e-11
"(float): Absolute tolerance of the moments entering a projection."

_LOGISTIC_SCALE = math.sqrt(3.0) / math.pi


def quadrature(integrand: Callable[[float], float],
               domain: tuple[float, float] = DEFAULT_QUADRATURE_DOMAIN,
               tol: float = DEFAULT_QUADRATURE_TOL,
               points: Optional[Sequence[float]] = None,
               rel_tol: float = 1e-10) -> float:
    """
    Integrates a function over a finite domain with adaptive
    Gauss-Kronrod refinement. Refinement stops once the error estimate
    is below max(tol, rel_tol * |integral|).

    Args:
        integrand (Callable[[float], float]): The function to integrate.
        domain (tuple[float, float]): The integration interval.
        tol (float): The absolute tolerance.
        points (Optional[Sequence[float]]): Discontinuities of the
            integrand. Points outside the domain are ignored.
        rel_tol (float): The relative tolerance.

    Returns:
        float: The integral.

    Raises:
        QuadratureException: If the refinement does not converge.
    """
    lower, upper = domain
    inner = sorted({float(p) for p in (points or ()) if lower < p < upper})
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                integrand, lower, upper, epsabs=tol, epsrel=rel_tol,
                limit=QUADRATURE_LIMIT, points=inner or None)
        except integrate.IntegrationWarning as e:
            logger.debug("Quadrature over %s did not converge.", domain)
            raise QuadratureException(f"Quadrature failed: {e}") from e
    if not math.isfinite(value):
        raise QuadratureException("Quadrature returned a non-finite value.")
    return float(value)


def _normal_pdf(z):
    return np.exp(-0.5 * np.square(z)) / math.sqrt(2.0 * math.pi)


def _normal_cdf(z):
    return special.ndtr(z)


def _normal_pdf_derivative(z):
    return -z * _normal_pdf(z)


def _normal_sample(rng: np.random.Generator, size) -> np.ndarray:
    return rng.standard_normal(size)


def _logistic_pdf(z):
    scaled = np.exp(-np.abs(z) / _LOGISTIC_SCALE)
    return scaled / (_LOGISTIC_SCALE * (1.0 + scaled) ** 2)


def _logistic_cdf(z):
    return special.expit(np.asarray(z) / _LOGISTIC_SCALE)


def _logistic_pdf_derivative(z):
    return -_logistic_pdf(z) * np.tanh(np.asarray(z)
                                       / (2.0 * _LOGISTIC_SCALE)) \
        / _LOGISTIC_SCALE


def _logistic_sample(rng: np.random.Generator, size) -> np.ndarray:
    return rng.logistic(0.0, _LOGISTIC_SCALE, size)


class ErrorLaw:
    """
    The law of the standardized error e, with mean 0 and variance 1.

    Attributes:
        name (str): A label for logs and output files.
        pdf (Callable): The density f.
        cdf (Callable): The distribution function F.
        pdf_derivative (Callable): The derivative f'.
        mu3 (float): The third moment E[e^3].
        mu4 (float): The fourth moment E[e^4].
        domain (tuple[float, float]): The quadrature domain.
    """
    # pylint: disable=too-many-arguments
    def __init__(self, pdf: Callable, cdf: Callable,
                 pdf_derivative: Callable,
                 mu3: Optional[float] = None, mu4: Optional[float] = None,
                 sampler: Optional[Callable] = None,
                 domain: tuple[float, float] = DEFAULT_QUADRATURE_DOMAIN,
                 name: str = "custom") -> None:
        """
        Initializes the error law and checks its validity. Missing
        moments are computed by quadrature.

        Args:
            pdf (Callable): The density f.
            cdf (Callable): The distribution function F.
            pdf_derivative (Callable): The derivative f'.
            mu3 (Optional[float]): The third moment.
            mu4 (Optional[float]): The fourth moment.
            sampler (Optional[Callable]): Draws errors as
                sampler(rng, size).
            domain (tuple[float, float]): The quadrature domain.
            name (str): A label.

        Raises:
            ErrorLawException: If the law is not standardized, the density
                vanishes on the domain or the Fisher information diverges.
            DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
        """
        self.name = name
        self.pdf = pdf
        self.cdf = cdf
        self.pdf_derivative = pdf_derivative
        self.domain = (float(domain[0]), float(domain[1]))
        self._sampler = sampler
        self.mu3 = float(mu3) if mu3 is not None \
            else self.expectation(lambda z: z ** 3)
        self.mu4 = float(mu4) if mu4 is not None \
            else self.expectation(lambda z: z ** 4)
        self.check()

    def __repr__(self) -> str:
        return (f"ErrorLaw(name={self.name!r}, mu3={self.mu3:.6g}, "
                f"mu4={self.mu4:.6g})")

    @staticmethod
    def standard_normal() -> "ErrorLaw":
        """
        Returns the standard normal law.

        Returns:
            ErrorLaw: The law with f(z) = exp(-z^2/2) / sqrt(2 pi).
        """
        return ErrorLaw(pdf=_normal_pdf, cdf=_normal_cdf,
                        pdf_derivative=_normal_pdf_derivative,
                        mu3=0.0, mu4=3.0, sampler=_normal_sample,
                        name="normal")

    @staticmethod
    def standardized_logistic() -> "ErrorLaw":
        """
        Returns the logistic law with scale sqrt(3)/pi, which has unit
        variance.

        Returns:
            ErrorLaw: The standardized logistic law.
        """
        return ErrorLaw(pdf=_logistic_pdf, cdf=_logistic_cdf,
                        pdf_derivative=_logistic_pdf_derivative,
                        mu3=0.0, mu4=4.2, sampler=_logistic_sample,
                        domain=(-30.0, 30.0), name="logistic")

    @property
    def denominator(self) -> float:
        """
        Returns E[e^4] - E[e^3]^2 - 1.

        Returns:
            float: The denominator of the projection formulas.
        """
        return self.mu4 - self.mu3 ** 2 - 1.0

    def expectation(self, g: Callable[[float], float],
                    points: Optional[Sequence[float]] = None,
                    tol: float = DEFAULT_QUADRATURE_TOL) -> float:
        """
        Returns E[g(e)] by quadrature over the domain of the law.

        Args:
            g (Callable[[float], float]): The function.
            points (Optional[Sequence[float]]): Discontinuities of g.
            tol (float): The absolute tolerance.

        Returns:
            float: The expectation.

        Raises:
            QuadratureException: If the quadrature fails.
        """
        return quadrature(lambda z: g(z) * self.pdf(z), self.domain,
                          tol=tol, points=points)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """
        Draws errors from the law.

        Args:
            rng (np.random.Generator): The random stream.
            size: The output shape.

        Returns:
            np.ndarray: The draws.

        Raises:
            ErrorLawException: If the law has no sampler.
        """
        if self._sampler is None:
            raise ErrorLawException(
                f"Error law {self.name} cannot be sampled.")
        return np.asarray(self._sampler(rng, size), dtype=float)

    def check(self) -> None:
        """
        Validates the law by quadrature.

        Raises:
            ErrorLawException: If the law is invalid.
            DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
        """
        grid = np.linspace(self.domain[0], self.domain[1], 2001)
        if not (np.asarray(self.pdf(grid)) > 0).all():
            raise ErrorLawException(
                f"The density of {self.name} vanishes on its domain.")
        mass = self.expectation(lambda z: 1.0)
        mean = self.expectation(lambda z: z)
        variance = self.expectation(lambda z: z * z)
        if abs(mass - 1.0) > MOMENT_TOL:
            raise ErrorLawException(
                f"The density of {self.name} integrates to {mass:.8g}.")
        if abs(mean) > MOMENT_TOL:
            raise ErrorLawException(
                f"The law {self.name} has mean {mean:.8g}, not 0.")
        if abs(variance - 1.0) > MOMENT_TOL:
            raise ErrorLawException(
                f"The law {self.name} has variance {variance:.8g}, not 1.")
        if self.denominator <= 0:
            raise DegenerateMomentsException(self.mu3, self.mu4)
        try:
            fisher_information(self)
        except QuadratureException as e:
            raise ErrorLawException(
                f"The Fisher information of {self.name} is not finite."
            ) from e


@dataclass(frozen=True)
class MissingnessSummary:
    """
    The observation probability E[delta] = E[pi(X)].

    Attributes:
        e_delta (float): A value in (0, 1].
    """
    e_delta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.e_delta <= 1.0:
            raise ValueError(
                f"E[delta] must lie in (0, 1], got {self.e_delta}.")


@dataclass(frozen=True)
class Indicator:
    """
    The function z -> 1[z <= t].

    Attributes:
        t (float): The threshold.
    """
    t: float

    @property
    def breakpoints(self) -> tuple[float]:
        """
        Returns the discontinuity of the indicator.

        Returns:
            tuple[float]: (t,).
        """
        return (self.t,)

    def __call__(self, z):
        return np.where(np.asarray(z) <= self.t, 1.0, 0.0)


def _breakpoints(h: Callable) -> tuple[float, ...]:
    return tuple(getattr(h, "breakpoints", ()))


def _check_positive(law: ErrorLaw, z: float) -> float:
    density = float(law.pdf(z))
    if not density > 0:
        raise ErrorLawException(
            f"The density of {law.name} vanishes at {z}.")
    return density


def score_location(law: ErrorLaw, z: float) -> float:
    """
    Returns the location score l1(z) = -f'(z) / f(z).

    Args:
        law (ErrorLaw): The error law.
        z (float): The point.

    Returns:
        float: The score.

    Raises:
        ErrorLawException: If f(z) = 0.
    """
    density = _check_positive(law, z)
    return -float(law.pdf_derivative(z)) / density


def score_scale(law: ErrorLaw, z: float) -> float:
    """
    Returns the scale score l2(z) = -1 - z f'(z) / f(z).

    Args:
        law (ErrorLaw): The error law.
        z (float): The point.

    Returns:
        float: The score.

    Raises:
        ErrorLawException: If f(z) = 0.
    """
    return -1.0 + z * score_location(law, z)


def jd_inverse(mu3: float, mu4: float) -> np.ndarray:
    """
    Returns J_d^-1 = [[mu4 - 1, -2 mu3], [-2 mu3, 4]] / (mu4 - mu3^2 - 1).

    Args:
        mu3 (float): The third moment.
        mu4 (float): The fourth moment.

    Returns:
        np.ndarray: The symmetric 2x2 matrix.

    Raises:
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
    """
    denominator = mu4 - mu3 ** 2 - 1.0
    if denominator <= 0:
        raise DegenerateMomentsException(mu3, mu4)
    return np.array([[mu4 - 1.0, -2.0 * mu3],
                     [-2.0 * mu3, 4.0]]) / denominator


def _scale_weight(law: ErrorLaw, z: float) -> float:
    """
    Returns (z^2 - mu3 z - 1) / (mu4 - mu3^2 - 1).
    """
    if law.denominator <= 0:
        raise DegenerateMomentsException(law.mu3, law.mu4)
    return (z * z - law.mu3 * z - 1.0) / law.denominator


def ld(law: ErrorLaw, z: float) -> np.ndarray:
    """
    Returns ld(z) = z e1 + c(z) (2 e2 - mu3 e1) with
    c(z) = (z^2 - mu3 z - 1) / (mu4 - mu3^2 - 1).

    Args:
        law (ErrorLaw): The error law.
        z (float): The point.

    Returns:
        np.ndarray: The 2-vector.

    Raises:
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
    """
    c = _scale_weight(law, z)
    return np.array([z - law.mu3 * c, 2.0 * c])


def l0(law: ErrorLaw, z: float) -> np.ndarray:
    """
    Returns l0(z) = l(z) - ld(z), where l = (l1, l2) are the location
    and scale scores.

    Args:
        law (ErrorLaw): The error law.
        z (float): The point.

    Returns:
        np.ndarray: The 2-vector.

    Raises:
        ErrorLawException: If f(z) = 0.
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
    """
    scores = np.array([score_location(law, z), score_scale(law, z)])
    return scores - ld(law, z)


@dataclass(frozen=True)
class GradientComponents:
    """
    The building blocks of the canonical gradient of an error law.

    Attributes:
        location_score (Callable): z -> l1(z).
        scale_score (Callable): z -> l2(z).
        l0 (Callable): z -> l0(z).
        ld (Callable): z -> ld(z).
        jd_inv (np.ndarray): The matrix J_d^-1.
    """
    location_score: Callable
    scale_score: Callable
    l0: Callable
    ld: Callable
    jd_inv: np.ndarray


def gradient_components(law: ErrorLaw) -> GradientComponents:
    """
    Returns the scores, l0, ld and J_d^-1 of an error law.

    Args:
        law (ErrorLaw): The error law.

    Returns:
        GradientComponents: The components.

    Raises:
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
    """
    return GradientComponents(
        location_score=partial(score_location, law),
        scale_score=partial(score_scale, law),
        l0=partial(l0, law),
        ld=partial(ld, law),
        jd_inv=jd_inverse(law.mu3, law.mu4))


@dataclass(frozen=True)
class ProjectedFunction:
    """
    The projection h0(z) = h(z) - E[h] - z E[e h]
    - c(z) (E[e^2 h] - mu3 E[e h] - E[h]), which has E[h0] = E[e h0] = 0
    and E[e^2 h0] = 0.

    Attributes:
        h (Callable): The projected function.
        law (ErrorLaw): The error law.
        mean (float): E[h(e)].
        first (float): E[e h(e)].
        second (float): E[e^2 h(e)].
    """
    h: Callable
    law: ErrorLaw
    mean: float
    first: float
    second: float

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """
        Returns the discontinuities inherited from h.

        Returns:
            tuple[float, ...]: The breakpoints.
        """
        return _breakpoints(self.h)

    def __call__(self, z):
        law = self.law
        c = (np.square(z) - law.mu3 * np.asarray(z) - 1.0) / law.denominator
        return (self.h(z) - self.mean - np.asarray(z) * self.first
                - c * (self.second - law.mu3 * self.first - self.mean))


def h0_projection(law: ErrorLaw, h: Callable) -> ProjectedFunction:
    """
    Returns the projection h0 of h, with the moments E[h], E[e h] and
    E[e^2 h] precomputed by quadrature. Discontinuities are read from
    the breakpoints attribute of h, if any.

    Args:
        law (ErrorLaw): The error law.
        h (Callable): A function with E[h(e)^2] finite.

    Returns:
        ProjectedFunction: The callable h0.

    Raises:
        QuadratureException: If a moment of h cannot be computed.
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
    """
    if law.denominator <= 0:
        raise DegenerateMomentsException(law.mu3, law.mu4)
    points = _breakpoints(h)
    return ProjectedFunction(
        h=h, law=law,
        mean=law.expectation(h, points, PROJECTION_TOL),
        first=law.expectation(lambda z: z * h(z), points, PROJECTION_TOL),
        second=law.expectation(lambda z: z * z * h(z), points,
                               PROJECTION_TOL))


def influence_F(  # pylint: disable=invalid-name
        law: ErrorLaw, miss: MissingnessSummary, delta, e, t: float):
    """
    Returns the influence function of the complete case estimator of F(t)
    (delta / E[delta]) [1[e <= t] - F(t) + f(t) {e + (t/2)(e^2 - 1)}].

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        delta: The indicator(s) in {0, 1}.
        e: The error(s).
        t (float): The point.

    Returns:
        The influence value, shaped like the broadcast of delta and e.
    """
    e = np.asarray(e, dtype=float)
    density = float(law.pdf(t))
    value = (np.where(e <= t, 1.0, 0.0) - float(law.cdf(t))
             + density * (e + 0.5 * t * (e * e - 1.0)))
    result = np.asarray(delta, dtype=float) / miss.e_delta * value
    return float(result) if result.ndim == 0 else result


@dataclass(frozen=True)
class EfficientInfluence:
    """
    The efficient influence function for E[h(e)],
    (delta / E[delta]) [h0(e) - E[h0 l0]^T J_d^-1 ld(e)].

    Attributes:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        h0 (ProjectedFunction): The projection of h.
        coefficients (np.ndarray): J_d^-1 E[h0 l0].
    """
    law: ErrorLaw
    miss: MissingnessSummary
    h0: ProjectedFunction
    coefficients: np.ndarray

    def __call__(self, delta, e):
        e_array = np.atleast_1d(np.asarray(e, dtype=float))
        correction = np.array([self.coefficients @ ld(self.law, z)
                               for z in e_array])
        value = np.asarray(self.h0(e_array), dtype=float) - correction
        result = np.asarray(delta, dtype=float) / self.miss.e_delta \
            * value.reshape(np.shape(e))
        return float(result) if result.ndim == 0 else result


def _h0_l0_moment(law: ErrorLaw, h0: ProjectedFunction) -> np.ndarray:
    points = h0.breakpoints
    return np.array([
        law.expectation(lambda z, k=k: h0(z) * l0(law, z)[k], points,
                        PROJECTION_TOL)
        for k in range(2)])


def efficient_influence_general(law: ErrorLaw, miss: MissingnessSummary,
                                h: Callable) -> EfficientInfluence:
    """
    Returns the efficient influence function for E[h(e)], with E[h0 l0]
    computed by quadrature.

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        h (Callable): The function defining the functional.

    Returns:
        EfficientInfluence: The callable (delta, e) -> value.

    Raises:
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
        QuadratureException: If a quadrature fails.
    """
    h0 = h0_projection(law, h)
    coefficients = jd_inverse(law.mu3, law.mu4) @ _h0_l0_moment(law, h0)
    return EfficientInfluence(law=law, miss=miss, h0=h0,
                              coefficients=coefficients)


def canonical_gradient(law: ErrorLaw, miss: MissingnessSummary,
                       h: Callable) -> tuple[Callable, np.ndarray]:
    """
    Returns the pair (s*, k*) characterizing the canonical gradient of
    E[h(e)], with k* = -(1/E[delta]) J_d^-1 E[l0 h0] and
    s*(z) = h0(z) / E[delta] - k*^T l0(z).

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        h (Callable): The function defining the functional.

    Returns:
        tuple[Callable, np.ndarray]: s* and the constant vector k*.

    Raises:
        DegenerateMomentsException: If mu4 - mu3^2 - 1 <= 0.
        QuadratureException: If a quadrature fails.
    """
    h0 = h0_projection(law, h)
    k_star = -jd_inverse(law.mu3, law.mu4) @ _h0_l0_moment(law, h0) \
        / miss.e_delta

    def s_star(z: float) -> float:
        return float(h0(z)) / miss.e_delta - float(k_star @ l0(law, z))

    return s_star, k_star


def asymptotic_variance_F(  # pylint: disable=invalid-name
        law: ErrorLaw, miss: MissingnessSummary, t: float) -> float:
    """
    Returns E[phi^2] for the influence function phi of the estimator of
    F(t), i.e. the limit of n times its mean squared error.

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        t (float): The point.

    Returns:
        float: The nonnegative asymptotic variance.

    Raises:
        QuadratureException: If the quadrature fails.
    """
    cdf_t = float(law.cdf(t))
    density_t = float(law.pdf(t))

    def integrand(z: float) -> float:
        value = (1.0 if z <= t else 0.0) - cdf_t \
            + density_t * (z + 0.5 * t * (z * z - 1.0))
        return value * value * float(law.pdf(z))

    variance = quadrature(integrand, law.domain, tol=1e-14, points=(t,))
    return max(variance, 0.0) / miss.e_delta


def amse_curve(law: ErrorLaw, miss: MissingnessSummary,
               grid: Sequence[float]) -> np.ndarray:
    """
    Returns asymptotic_variance_F at every grid point.

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        grid (Sequence[float]): The points.

    Returns:
        np.ndarray: The values.
    """
    return np.array([asymptotic_variance_F(law, miss, t) for t in grid])


def amise(law: ErrorLaw, miss: MissingnessSummary,
          grid: Sequence[float],
          curve: Optional[Sequence[float]] = None) -> float:
    """
    Returns the trapezoidal integral of asymptotic_variance_F over the
    grid, with respect to Lebesgue measure dt. The default grid is
    [-5, 5] with step 0.01; see "Numerical conventions" in the efficiency
    documentation.

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        grid (Sequence[float]): Increasing points covering the effective
            support of the law.
        curve (Optional[Sequence[float]]): Precomputed amse_curve values
            on the grid.

    Returns:
        float: The asymptotic mean integrated squared error.

    Raises:
        GridException: If the grid is not increasing.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size < 2:
        return 0.0
    if not (np.diff(grid) > 0).all():
        raise GridException("The AMISE grid must be strictly increasing.")
    if curve is None:
        curve = amse_curve(law, miss, grid)
    curve = np.asarray(curve, dtype=float)
    if curve.shape != grid.shape:
        raise GridException("The curve does not match the grid.")
    return float(integrate.trapezoid(curve, grid))


def efficient_variance_general(law: ErrorLaw, miss: MissingnessSummary,
                               h: Callable) -> float:
    """
    Returns the variance of the efficient influence function for E[h(e)],
    which is the efficiency bound. Since delta is independent of e, this
    is E[(h0 - E[h0 l0]^T J_d^-1 ld)^2] / E[delta].

    Args:
        law (ErrorLaw): The error law.
        miss (MissingnessSummary): The observation probability.
        h (Callable): The function defining the functional.

    Returns:
        float: The efficiency bound.

    Raises:
        QuadratureException: If a quadrature fails.
    """
    influence = efficient_influence_general(
        law, MissingnessSummary(1.0), h)
    second_moment = law.expectation(
        lambda z: float(influence(1, z)) ** 2, influence.h0.breakpoints,
        tol=1e-14)
    return second_moment / miss.e_delta


def fisher_information(law: ErrorLaw) -> tuple[float, float]:
    """
    Returns the Fisher information for location E[l1^2] and for scale
    E[l2^2].

    Args:
        law (ErrorLaw): The error law.

    Returns:
        tuple[float, float]: The two informations.

    Raises:
        QuadratureException: If either integral does not converge.
    """
    location = law.expectation(lambda z: score_location(law, z) ** 2)
    scale = law.expectation(lambda z: score_scale(law, z) ** 2)
    return location, scale
