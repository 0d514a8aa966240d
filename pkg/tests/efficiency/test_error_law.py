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
This module contains unit tests for the quadrature, the ErrorLaw class
and the scores.
"""

import math
import numpy as np
import pytest
from scipy import stats
from resedf import ErrorLaw, MissingnessSummary, ErrorLawException, \
    DegenerateMomentsException, QuadratureException, quadrature, \
    score_location, score_scale, fisher_information


def normal_law(loc: float = 0.0, scale: float = 1.0, **kwargs) -> ErrorLaw:
    """
    Returns an ErrorLaw built from scipy's normal distribution.
    """
    dist = stats.norm(loc, scale)
    return ErrorLaw(pdf=dist.pdf, cdf=dist.cdf,
                    pdf_derivative=lambda z: -(z - loc) / scale ** 2
                    * dist.pdf(z), **kwargs)


def test_quadrature():
    """
    Test the quadrature on integrals with known values.
    """
    pdf = stats.norm.pdf
    assert quadrature(pdf, (-10.0, 10.0), tol=1e-12) == \
        pytest.approx(1.0, abs=1e-10)
    assert quadrature(lambda z: z * z * pdf(z), (-10.0, 10.0),
                      tol=1e-12) == pytest.approx(1.0, abs=1e-8)
    assert quadrature(lambda z: z * pdf(z) if z <= 0 else 0.0,
                      (-10.0, 10.0), points=(0.0,)) == \
        pytest.approx(-0.3989423, abs=1e-7)
    assert quadrature(lambda z: 1.0, (0.0, 1.0), points=(-1.0, 2.0)) == \
        pytest.approx(1.0)


def test_quadrature_failure():
    """
    Test that a divergent integral raises a QuadratureException.
    """
    with pytest.raises(QuadratureException):
        quadrature(lambda z: 1.0 / z, (0.0, 1.0))


def test_standard_normal():
    """
    Test the standard normal law, its moments and scores.
    """
    law = ErrorLaw.standard_normal()
    assert law.name == "normal"
    assert (law.mu3, law.mu4) == (0.0, 3.0)
    assert law.denominator == 2.0
    assert float(law.cdf(0.0)) == 0.5
    assert float(law.pdf(0.0)) == pytest.approx(0.39894228, abs=1e-8)
    assert "normal" in repr(law)

    assert score_location(law, 0.7) == pytest.approx(0.7)
    assert score_scale(law, 0.7) == pytest.approx(-0.51)
    assert score_scale(law, 0.0) == pytest.approx(-1.0)

    location, scale = fisher_information(law)
    assert location == pytest.approx(1.0, abs=1e-7)
    assert scale == pytest.approx(2.0, abs=1e-7)


def test_standardized_logistic():
    """
    Test the logistic law with unit variance, whose location information
    is pi^2 / 9.
    """
    law = ErrorLaw.standardized_logistic()
    assert law.mu4 == 4.2
    assert law.expectation(lambda z: z * z) == pytest.approx(1.0, abs=1e-7)
    assert float(law.cdf(0.0)) == pytest.approx(0.5)
    location, _ = fisher_information(law)
    assert location == pytest.approx(math.pi ** 2 / 9.0, abs=1e-6)


def test_moments_by_quadrature():
    """
    Test that moments not given are computed by quadrature.
    """
    logistic = ErrorLaw.standardized_logistic()
    law = ErrorLaw(pdf=logistic.pdf, cdf=logistic.cdf,
                   pdf_derivative=logistic.pdf_derivative,
                   domain=(-30.0, 30.0))
    assert law.mu3 == pytest.approx(0.0, abs=1e-8)
    assert law.mu4 == pytest.approx(4.2, abs=1e-6)
    assert law.name == "custom"

    assert normal_law().mu4 == pytest.approx(3.0, abs=1e-7)


def test_invalid_laws():
    """
    Test that laws which are not standardized or have degenerate moments
    are rejected.
    """
    with pytest.raises(ErrorLawException, match="mean"):
        normal_law(loc=0.5)
    with pytest.raises(ErrorLawException, match="variance"):
        normal_law(scale=2.0)
    with pytest.raises(ErrorLawException, match="vanishes"):
        ErrorLaw(pdf=lambda z: np.where(np.abs(z) < 5.0, 0.1, 0.0),
                 cdf=lambda z: z, pdf_derivative=lambda z: 0.0,
                 mu3=0.0, mu4=3.0)
    with pytest.raises(DegenerateMomentsException):
        normal_law(mu3=0.0, mu4=1.0)


def test_sample():
    """
    Test drawing from a law, ensuring a law without sampler raises.
    """
    law = ErrorLaw.standard_normal()
    draws = law.sample(np.random.default_rng(0), 100000)
    assert draws.shape == (100000,)
    assert abs(draws.mean()) < 0.02
    assert draws.var() == pytest.approx(1.0, abs=0.02)

    draws = ErrorLaw.standardized_logistic().sample(
        np.random.default_rng(0), 100000)
    assert draws.var() == pytest.approx(1.0, abs=0.03)

    with pytest.raises(ErrorLawException, match="cannot be sampled"):
        normal_law().sample(np.random.default_rng(0), 3)


def test_missingness_summary():
    """
    Test that E[delta] must lie in (0, 1].
    """
    assert MissingnessSummary(1.0).e_delta == 1.0
    for value in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            MissingnessSummary(value)
