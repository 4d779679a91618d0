"""Limiting variance of linear eigenvalue statistics.

For polynomial f the contour formula collapses to closed forms in the
moments of μ: f = x gives λ² E v², f = x² gives λ⁴ Var(v²). With
a = b = 2 and λ = 2 these are 4/7 and 64/147.
"""

import numpy as np
import pytest

from PySSKLab.errors import ContourTooClose
from PySSKLab.freeconv import clt_variance, rectangle_contour

TOL = 1e-7


class TestContour:
    def test_encloses_unit_winding(self):
        nodes, weights = rectangle_contour(-1.0, 1.0, 0.5, 0.5, 0.5, 400, 20)
        winding = np.sum(weights / nodes) / (2j * np.pi)
        assert winding == pytest.approx(1.0, abs=1e-12)

    def test_cauchy_integral(self):
        nodes, weights = rectangle_contour(-1.0, 1.0, 0.25, 0.25, 0.25, 800, 20)
        value = np.sum(weights * np.exp(nodes) / (nodes - 0.3)) / (2j * np.pi)
        assert value == pytest.approx(np.exp(0.3), rel=1e-10)

    def test_node_count(self):
        nodes, weights = rectangle_contour(-1.0, 1.0, 0.5, 0.5, 0.5, 100, 20)
        assert nodes.size == weights.size == 4 * 100


class TestVariance:
    def test_constant_has_no_fluctuation(self, fc2):
        assert clt_variance(fc2, lambda x: np.ones_like(x)) == pytest.approx(0.0, abs=TOL)

    def test_linear(self, fc2):
        assert clt_variance(fc2, lambda x: x) == pytest.approx(4 / 7, rel=TOL)

    def test_quadratic(self, fc2):
        assert clt_variance(fc2, lambda x: x**2) == pytest.approx(64 / 147, rel=TOL)

    def test_linear_matches_base_moment(self, fc12):
        expected = fc12.lam**2 * fc12.measure.moment(2)
        assert clt_variance(fc12, lambda x: x) == pytest.approx(expected, rel=TOL)

    def test_point_mass_has_no_fluctuation(self, semicircle):
        assert clt_variance(semicircle, lambda x: x**2) == pytest.approx(0.0, abs=TOL)
        assert clt_variance(semicircle, np.exp) == pytest.approx(0.0, abs=TOL)

    def test_nonnegative(self, fc2):
        assert clt_variance(fc2, lambda x: np.cos(3 * x) + x**3) >= 0

    def test_log_with_singularity_outside(self, fc2):
        gamma = fc2.L_plus + 0.5
        variance = clt_variance(fc2, lambda x: np.log(gamma - x), singularities=(gamma,))
        assert variance > 0

    def test_singularity_inside_support(self, fc2):
        with pytest.raises(ContourTooClose):
            clt_variance(fc2, lambda x: np.log(1.0 - x), singularities=(1.0,))

    def test_singularity_too_close(self, fc2):
        gamma = fc2.L_plus + 1e-4
        with pytest.raises(ContourTooClose):
            clt_variance(fc2, lambda x: np.log(gamma - x), singularities=(gamma,))
