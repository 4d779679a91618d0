import math

import numpy as np
import pytest

from PySSKLab.errors import DivergentIntegral, NonFinite, NonPositiveWeight, NotCentered
from PySSKLab.measure import (
    DiscreteMeasure,
    JacobiMeasure,
    PointMass,
    edge_constants,
    gauss_jacobi,
    make_jacobi,
    measure_from_dict,
)

TOL = 1e-10
SAMPLES = 1_000_000


class TestConstruction:
    def test_normalization_of_quartic_weight(self):
        measure = make_jacobi(2, 2, quadrature_order=64)
        assert measure.Z == pytest.approx(16 / 15, rel=TOL)

    def test_uniform(self, uniform):
        assert uniform.Z == pytest.approx(2.0, rel=TOL)
        assert uniform.moment(1) == pytest.approx(0.0, abs=1e-12)

    def test_off_center_measure_is_rejected(self):
        with pytest.raises(NotCentered):
            make_jacobi(2, 12)

    def test_nonpositive_weight_is_rejected(self):
        with pytest.raises(NonPositiveWeight):
            make_jacobi(2, 2, {"poly": [0.5, 0.0, -1.0]})

    def test_exponent_must_exceed_minus_one(self):
        with pytest.raises(ValueError):
            make_jacobi(-1, -1)
        with pytest.raises(DivergentIntegral):
            gauss_jacobi(8, -1.0, 0.0)

    def test_even_polynomial_weight_stays_centered(self):
        measure = make_jacobi(3, 3, {"poly": [1.0, 0.0, 0.5]})
        assert measure.integrate(lambda x: 1.0) == pytest.approx(1.0, abs=TOL)
        assert abs(measure.moment(1)) < 1e-8

    def test_tabulated_weight(self):
        x = np.linspace(-1, 1, 41)
        measure = make_jacobi(2, 2, {"table": {"x": x.tolist(), "y": (1 + 0.5 * x**2).tolist()}})
        reference = make_jacobi(2, 2, {"poly": [1.0, 0.0, 0.5]})
        assert measure.moment(2) == pytest.approx(reference.moment(2), rel=1e-3)

    def test_from_dict_round_trip_hash(self, jacobi12):
        rebuilt = measure_from_dict(jacobi12.to_dict())
        assert isinstance(rebuilt, JacobiMeasure)
        assert rebuilt.spec_hash() == jacobi12.spec_hash()

    def test_from_dict_point_mass_and_atoms(self):
        assert isinstance(measure_from_dict({"point_mass": 0}), PointMass)
        discrete = measure_from_dict({"atoms": [-0.5, 0.5], "weights": [1, 1]})
        assert discrete.weights.tolist() == [0.5, 0.5]

    def test_from_dict_names_missing_exponent(self):
        with pytest.raises(ValueError, match="b"):
            measure_from_dict({"a": 2})


class TestIntegrate:
    def test_total_mass(self, jacobi2):
        assert jacobi2.integrate(lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=TOL)

    def test_second_moment(self, jacobi2):
        assert jacobi2.integrate(lambda x: x**2) == pytest.approx(1 / 7, rel=TOL)

    def test_tau_plus(self, jacobi2):
        assert jacobi2.integrate_weighted(np.ones_like, right=1) == pytest.approx(5 / 4, rel=1e-10)
        assert jacobi2.integrate_weighted(np.ones_like, right=2) == pytest.approx(5 / 2, rel=1e-10)
        assert jacobi2.integrate_weighted(np.ones_like, left=1) == pytest.approx(5 / 4, rel=1e-10)

    def test_weighted_divergence(self, jacobi2):
        with pytest.raises(DivergentIntegral):
            jacobi2.integrate_weighted(np.ones_like, right=3)

    def test_order_doubling_is_stable(self, jacobi12):
        f = lambda x: x**6 - x**3 + 2
        assert abs(jacobi12.integrate(f, 64) - jacobi12.integrate(f, 128)) < 1e-9

    def test_nonfinite_integrand(self, jacobi2):
        with pytest.raises(NonFinite):
            jacobi2.integrate(lambda x: np.where(x > 0, np.inf, 1.0))

    def test_gauss_jacobi_rule_integrates_weight(self):
        nodes, weights = gauss_jacobi(20, 2.0, 3.0)
        exact = 2 ** (2 + 3 + 1) * math.gamma(3) * math.gamma(4) / math.gamma(7)
        assert weights.sum() == pytest.approx(exact, rel=1e-12)
        assert np.all(np.abs(nodes) < 1)


class TestStieltjes:
    def test_matches_quadrature_far_from_support(self, jacobi2):
        s = 3.0 + 0.5j
        expected = jacobi2.integrate(lambda x: 1 / (x - s))
        assert jacobi2.stieltjes(s) == pytest.approx(expected, rel=1e-12)

    def test_near_support_approaches_density(self, jacobi2):
        x = 0.3
        value = jacobi2.stieltjes(x + 1e-3j)
        assert value.imag == pytest.approx(math.pi * jacobi2.pdf(x), rel=1e-2)

    def test_kernel_and_adaptive_rules_agree(self, jacobi2):
        s = 1.05 + 0.01j
        assert jacobi2.stieltjes(s, order=512) == pytest.approx(jacobi2.stieltjes(s, order=16), rel=1e-8)

    def test_undefined_on_support(self, jacobi2):
        with pytest.raises(ValueError):
            jacobi2.stieltjes(0.2 + 0j)

    def test_discrete_measure_is_exact(self):
        measure = DiscreteMeasure([-0.5, 0.5], [0.25, 0.75])
        s = 2.0 + 1.0j
        expected = 0.25 / (-0.5 - s) + 0.75 / (0.5 - s)
        assert measure.stieltjes(s) == pytest.approx(expected, rel=1e-14)


class TestEdgeConstants:
    def test_quartic_weight(self, jacobi2):
        edges = edge_constants(jacobi2, 2.0)
        assert edges.lambda_plus == pytest.approx(math.sqrt(5 / 2), rel=1e-8)
        assert edges.tau_plus == pytest.approx(5 / 4, rel=1e-8)
        assert edges.lambda_minus == pytest.approx(edges.lambda_plus, rel=TOL)
        assert edges.tau_minus == pytest.approx(edges.tau_plus, rel=TOL)
        assert edges.above_plus and edges.above_minus

    def test_uniform_diverges(self, uniform):
        edges = edge_constants(uniform, 1.0)
        assert not edges.plus_finite and not edges.minus_finite
        assert edges.c_mu is None and edges.c_mu_prime is None
        assert edges.to_dict()["lambda_plus"] is None

    def test_weibull_constant(self, jacobi12):
        edges = edge_constants(jacobi12, 2.0)
        expected = (2 / (4 - edges.lambda_plus**2)) ** 13 * 2.0**12 / jacobi12.Z
        assert edges.c_mu == pytest.approx(expected, rel=1e-12)
        assert edges.c_mu_prime == pytest.approx(edges.c_mu, rel=1e-8)

    def test_quadrature_convergence(self):
        low = edge_constants(make_jacobi(5, 5, quadrature_order=64), 2.0)
        high = edge_constants(make_jacobi(5, 5, quadrature_order=128), 2.0)
        assert abs(low.lambda_plus**2 - high.lambda_plus**2) < 1e-9
        assert abs(low.tau_plus - high.tau_plus) < 1e-9

    def test_lambda_must_be_positive(self, jacobi2):
        with pytest.raises(ValueError):
            edge_constants(jacobi2, 0.0)

    def test_reflection_swaps_edges(self):
        # d(x) = 1 + 5x/9 centers the (1+x)^2 (1-x)^2.5 weight
        measure = make_jacobi(2, 2.5, [1.0, 5 / 9])
        assert measure.reflected().moment(1) == pytest.approx(0.0, abs=1e-12)
        edges = edge_constants(measure, 2.0)
        mirrored = edge_constants(measure.reflected(), 2.0)
        assert mirrored.tau_plus == pytest.approx(edges.tau_minus, rel=1e-10)
        assert mirrored.lambda_minus == pytest.approx(edges.lambda_plus, rel=1e-10)


class TestSample:
    def test_uniform_median(self, uniform, rng):
        draws = uniform.sample(rng, SAMPLES)
        assert abs(np.mean(draws < 0) - 0.5) < 0.002

    def test_second_moment(self, jacobi2, rng):
        draws = jacobi2.sample(rng, SAMPLES)
        assert abs(np.mean(draws**2) - 1 / 7) < 3e-4

    def test_moments_match_quadrature(self, rng):
        measure = make_jacobi(3, 3, {"poly": [1.0, 0.0, 1.0]})
        draws = measure.sample(rng, SAMPLES)
        for k in range(1, 5):
            error = np.std(draws**k) / math.sqrt(SAMPLES)
            assert abs(np.mean(draws**k) - measure.moment(k)) < 5 * error

    def test_support(self, jacobi12, rng):
        draws = jacobi12.sample(rng, 10_000)
        assert draws.max() < 1 and draws.min() > -1

    def test_rejection_path_for_table_weight(self, rng):
        x = np.linspace(-1, 1, 21)
        measure = make_jacobi(2, 2, {"table": {"x": x.tolist(), "y": (2 + np.cos(3 * x)).tolist()}})
        draws = measure.sample(rng, 200_000)
        assert abs(np.mean(draws**2) - measure.moment(2)) < 5 * np.std(draws**2) / math.sqrt(draws.size)

    def test_seeded_draws_repeat(self, jacobi2):
        first = jacobi2.sample(np.random.default_rng(3), 100)
        second = jacobi2.sample(np.random.default_rng(3), 100)
        assert np.array_equal(first, second)

    def test_point_mass_sample(self, rng):
        assert PointMass().sample(rng) == 0.0
