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
This module contains unit tests for the basis, kernel and bandwidth
helpers of the local polynomial smoother.
"""

import math
import numpy as np
import pytest
from scipy import integrate
from resedf import MultiIndex, KernelSpec, SmootherConfig, \
    DimensionMismatchException, multi_index_set, psi, kernel_weight, \
    bandwidth_rule


def test_multi_index_set():
    """
    Test the enumeration of the multi-indices of order <= d,
    ensuring the zero index comes first and no index is repeated.
    """
    assert multi_index_set(1, 1) == (MultiIndex((0,)), MultiIndex((1,)))
    assert multi_index_set(3, 0) == (MultiIndex((0, 0, 0)),)

    basis = multi_index_set(2, 3)
    assert len(basis) == 10
    assert basis[0] == MultiIndex((0, 0))
    assert len(set(basis)) == 10
    assert all(index.order <= 3 for index in basis)
    orders = [index.order for index in basis]
    assert orders == sorted(orders)
    assert basis[1] == MultiIndex((1, 0))
    assert basis[2] == MultiIndex((0, 1))

    for m, d in ((1, 4), (3, 2), (4, 3)):
        assert len(multi_index_set(m, d)) == math.comb(m + d, d)

    with pytest.raises(ValueError):
        multi_index_set(0, 1)
    with pytest.raises(ValueError):
        multi_index_set(2, -1)


def test_multi_index():
    """
    Test the MultiIndex class, ensuring negative entries are rejected.
    """
    index = MultiIndex((2, 1, 0))
    assert index.order == 3
    assert len(index) == 3

    with pytest.raises(ValueError, match="nonnegative"):
        MultiIndex((1, -1))


def test_psi():
    """
    Test the scaled monomials.
    """
    assert psi(MultiIndex((0, 0)), (0.3, -0.7)) == 1.0
    assert psi(MultiIndex((2, 1)), (0.5, 2.0)) == pytest.approx(0.25)
    assert psi(MultiIndex((3,)), (-1.0,)) == pytest.approx(-1.0 / 6.0)

    with pytest.raises(DimensionMismatchException):
        psi(MultiIndex((1, 1)), (1.0,))


def test_kernel_weight():
    """
    Test the tricube product kernel, ensuring it vanishes outside
    the window.
    """
    kernel = KernelSpec()
    assert kernel_weight(kernel, (0.0,), 1.0) == pytest.approx(70.0 / 81.0)
    assert kernel_weight(kernel, (0.5,), 1.0) == pytest.approx(0.578944,
                                                               abs=1e-6)
    assert kernel_weight(kernel, (1.2,), 1.0) == 0.0
    assert kernel_weight(kernel, (0.0, 0.0), 2.0) == \
        pytest.approx((70.0 / 81.0) ** 2)
    assert kernel_weight(kernel, (0.1, 2.5), 2.0) == 0.0

    with pytest.raises(ValueError):
        kernel_weight(kernel, (0.0,), 0.0)


def test_kernel_densities_integrate_to_one():
    """
    Test that every supported coordinate density integrates to 1.
    """
    u = np.linspace(-1.0, 1.0, 200001)
    for name in ("tricube", "epanechnikov", "biweight", "uniform"):
        values = KernelSpec((name,)).weights(u[:, None])
        assert integrate.trapezoid(values, u) == pytest.approx(1.0, abs=1e-4)
        assert (values >= 0).all()


def test_kernel_spec():
    """
    Test the KernelSpec class, ensuring unknown names and a wrong
    number of coordinate densities are rejected.
    """
    with pytest.raises(ValueError, match="Unknown kernel density"):
        KernelSpec(("gaussian",))
    with pytest.raises(ValueError):
        KernelSpec(())

    kernel = KernelSpec(("tricube", "uniform"))
    weights = kernel.weights(np.array([[0.0, 0.0], [0.0, 1.5]]))
    assert weights[0] == pytest.approx(70.0 / 81.0 * 0.5)
    assert weights[1] == 0.0

    with pytest.raises(DimensionMismatchException):
        kernel.weights(np.zeros((1, 3)))


def test_bandwidth_rule():
    """
    Test the default bandwidth 3 (n log n)^(-1/7).
    """
    assert bandwidth_rule(100) == pytest.approx(1.2493, abs=1e-4)
    assert bandwidth_rule(1000) == pytest.approx(0.8485, abs=1e-4)
    assert bandwidth_rule(2) == \
        pytest.approx(3.0 * (2.0 * math.log(2.0)) ** (-1.0 / 7.0))

    with pytest.raises(ValueError, match="n >= 2"):
        bandwidth_rule(1)


def test_smoother_config():
    """
    Test the SmootherConfig class, ensuring invalid settings are
    rejected.
    """
    cfg = SmootherConfig(dimension=2, degree=3, bandwidth=1.0)
    assert cfg.basis_size == 10
    assert cfg.kernel == KernelSpec()

    for kwargs in ({"dimension": 0, "degree": 1, "bandwidth": 1.0},
                   {"dimension": 1, "degree": -1, "bandwidth": 1.0},
                   {"dimension": 1, "degree": 1, "bandwidth": 0.0},
                   {"dimension": 1, "degree": 1, "bandwidth": 1.0,
                    "variance_floor": 0.0},
                   {"dimension": 1, "degree": 1, "bandwidth": 1.0,
                    "escalation_cap": 0.5}):
        with pytest.raises(ValueError):
            SmootherConfig(**kwargs)
