"""Saddle point evaluation of the spherical integral."""

import math

import numpy as np
import pytest

from PySSKLab.errors import BranchCut, DomainError, OutOfDomain, QuadratureFailure
from PySSKLab.methods import LAPLACE, STEEPEST_DESCENT, VERTICAL_LINE
from PySSKLab.saddle import (
    R_derivative,
    R_eval,
    contour_K,
    free_energy,
    laplace_error,
    saddle_data,
    saddle_gamma,
    steepest_curve,
    weibull_cdf,
    weibull_cdf_lower,
)
from PySSKLab.spectra import sample_matrix

TOL = 1e-10
BETA = 1.0


class TestR:
    def test_single_eigenvalue(self):
        assert R_eval([0.0], 1.0, 1.0 + 0j) == pytest.approx(2.0, abs=TOL)

    def test_imaginary_part(self, sample12):
        x, y = 2.3, 0.4
        expected = 2 * BETA * y - np.mean(np.arctan2(y, x - sample12.eigs))
        assert R_eval(sample12, BETA, complex(x, y)).imag == pytest.approx(expected, abs=TOL)

    def test_branch_cut(self, sample12):
        with pytest.raises(BranchCut):
            R_eval(sample12, BETA, sample12.lambda_1 - 0.1 + 0j)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivative_ladder(self, sample12, order):
        z, h = 3.0 + 0.2j, 1e-5
        if order == 1:
            lower = lambda w: R_eval(sample12, BETA, w)
        else:
            lower = lambda w: R_derivative(sample12, BETA, w, order - 1)
        difference = (lower(z + h) - lower(z - h)) / (2 * h)
        assert R_derivative(sample12, BETA, z, order) == pytest.approx(difference, rel=1e-6)

    def test_derivative_order(self, sample12):
        with pytest.raises(ValueError):
            R_derivative(sample12, BETA, 3.0, 0)


class TestSaddle:
    def test_single_eigenvalue(self):
        assert saddle_gamma([0.0], 1.0) == pytest.approx(0.5, abs=TOL)

    @pytest.mark.parametrize("beta", [0.1, 1.0, 10.0])
    def test_equal_eigenvalues(self, beta):
        assert saddle_gamma(np.full(5, 0.7), beta) == pytest.approx(0.7 + 1 / (2 * beta), abs=TOL)

    def test_root(self, sample12):
        gamma = saddle_gamma(sample12, BETA)
        assert gamma > sample12.lambda_1
        assert R_derivative(sample12, BETA, gamma) == pytest.approx(0.0, abs=1e-12)
        assert R_derivative(sample12, BETA, gamma, 2) > 0

    def test_high_temperature_saddle_leaves_spectrum(self, sample12):
        assert saddle_gamma(sample12, 0.05) - sample12.lambda_1 > 1.0

    def test_rejects_nonpositive_beta(self, sample12):
        with pytest.raises(ValueError):
            saddle_gamma(sample12, 0.0)

    def test_follows_limiting_saddle_at_high_temperature(self, sample12, fc12):
        beta = fc12.beta_c() / 2
        epsilon = 1 / (fc12.measure.b + 1) + 0.005
        gamma_hat = fc12.gamma_hat(beta, with_variance=False).gamma_hat
        assert abs(saddle_gamma(sample12, beta) - gamma_hat) < sample12.N ** (3 * epsilon - 0.5)


class TestSteepestCurve:
    def test_passes_through_saddle(self, sample12):
        gamma = saddle_gamma(sample12, BETA)
        assert steepest_curve(sample12, BETA, 0.0) == pytest.approx(gamma, abs=TOL)

    def test_even(self, sample12):
        assert steepest_curve(sample12, BETA, 0.3) == steepest_curve(sample12, BETA, -0.3)

    @pytest.mark.parametrize("y", [0.01, 0.5, 1.2, 1.5])
    def test_real_on_curve(self, sample12, y):
        x = steepest_curve(sample12, BETA, y)
        assert R_eval(sample12, BETA, complex(x, y)).imag == pytest.approx(0.0, abs=1e-11)
        assert x < saddle_gamma(sample12, BETA)

    def test_descends(self, sample12):
        ys = [0.0, 0.2, 0.6, 1.2]
        values = [R_eval(sample12, BETA, complex(steepest_curve(sample12, BETA, y), y)).real for y in ys]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_domain(self, sample12):
        with pytest.raises(OutOfDomain):
            steepest_curve(sample12, BETA, math.pi / 2)

    def test_strictly_decreasing_away_from_saddle(self, sample12, fc12):
        beta = 2 * fc12.beta_c()
        gamma = saddle_gamma(sample12, beta)
        ys = np.linspace(0.3 / beta, math.pi / (2 * beta), 200, endpoint=False)
        xs = np.array([steepest_curve(sample12, beta, y, gamma) for y in ys])
        assert np.all(np.diff(xs) < 0)


class TestContour:
    def test_single_eigenvalue(self):
        # the Hankel integral of e^z z^{-1/2} gives K = √(2π/e)
        assert contour_K([0.0], 1.0) == pytest.approx(math.sqrt(2 * math.pi / math.e), rel=1e-8)

    def test_exact_free_energy_of_one_eigenvalue(self):
        assert free_energy([0.0], 1.0, exact=True) == pytest.approx(0.0, abs=1e-8)

    def test_methods_agree(self, sample12):
        gamma = saddle_gamma(sample12, BETA)
        steepest = contour_K(sample12, BETA, STEEPEST_DESCENT, gamma)
        vertical = contour_K(sample12, BETA, VERTICAL_LINE, gamma)
        assert vertical == pytest.approx(steepest, rel=1e-6)

    def test_laplace_is_close_at_high_temperature(self, sample12):
        # the saddle stays O(1) away from λ_1, so the Gaussian width is exact to O(1/N)
        beta = 0.1
        assert abs(laplace_error(sample12, beta)) < 0.05
        steepest = contour_K(sample12, beta)
        assert contour_K(sample12, beta, LAPLACE) == pytest.approx(steepest, rel=0.05)

    def test_vertical_line_needs_three_eigenvalues(self):
        with pytest.raises(QuadratureFailure):
            contour_K([0.1, -0.1], 1.0, VERTICAL_LINE)

    def test_unknown_method(self, sample12):
        with pytest.raises(ValueError):
            contour_K(sample12, BETA, "trapezoid")

    def test_free_energy_normalizations_agree(self, sample12):
        asymptotic = free_energy(sample12, BETA)
        exact = free_energy(sample12, BETA, exact=True)
        assert asymptotic == pytest.approx(exact, abs=1e-3)

    def test_saddle_data(self, sample12):
        data = saddle_data(sample12, BETA)
        record = data.to_dict()
        assert record["N"] == 200
        assert record["method"] == STEEPEST_DESCENT
        assert data.free_energy() == pytest.approx(free_energy(sample12, BETA))


class TestWeibull:
    def test_upper_law(self):
        assert weibull_cdf(1.0, 1.0, 0.0) == 1.0
        assert weibull_cdf(1.0, 1.0, -1.0) == pytest.approx(math.exp(-0.5))
        values = weibull_cdf(2.0, 3.0, np.array([-2.0, -1.0, -0.5]))
        assert np.all(np.diff(values) > 0)

    def test_lower_law(self):
        assert weibull_cdf_lower(1.0, 1.0, 0.0) == 0.0
        assert weibull_cdf_lower(1.0, 1.0, 1.0) == pytest.approx(1 - math.exp(-0.5))
        assert weibull_cdf_lower(1.0, 12.0, 50.0) == pytest.approx(1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            weibull_cdf(1.0, 1.0, 0.5)
        with pytest.raises(DomainError):
            weibull_cdf_lower(1.0, 1.0, -0.5)
        with pytest.raises(DomainError):
            weibull_cdf(0.0, 1.0, -1.0)
        with pytest.raises(DomainError):
            weibull_cdf_lower(1.0, -1.0, 1.0)


@pytest.mark.slow
class TestSteepestDescentSuite:
    N = 500

    @pytest.mark.parametrize("seed", range(20))
    def test_sample(self, jacobi12, fc12, seed):
        sample = sample_matrix(jacobi12, 2.0, self.N, seed=seed)
        beta = 2 * fc12.beta_c()
        gamma = saddle_gamma(sample, beta)
        assert abs(R_derivative(sample, beta, gamma)) < 1e-12

        ys = np.linspace(0.0, math.pi / (2 * beta), 201, endpoint=False)[1:]
        xs = np.array([steepest_curve(sample, beta, y, gamma) for y in ys])
        residuals = [abs(R_eval(sample, beta, complex(x, y)).imag) for x, y in zip(xs, ys)]
        assert max(residuals) < 1e-12
        assert np.all(xs < gamma)
        assert np.all(np.diff(xs[ys >= 0.3 / beta]) < 0)

        steepest = contour_K(sample, beta, STEEPEST_DESCENT, gamma)
        vertical = contour_K(sample, beta, VERTICAL_LINE, gamma)
        assert vertical == pytest.approx(steepest, rel=1e-6)
        assert self.N**-10 <= steepest <= 20
