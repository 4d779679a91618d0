"""Free convolution of the semicircle law with λμ.

The point mass δ₀ gives the semicircle law, whose Stieltjes transform
m(z) = (-z + √(z² - 4))/2 is known in closed form; the quartic Jacobi
measure a = b = 2 at λ = 2 has the closed form edges ±(λ + τ/λ) = ±2.625.
"""

import math

import numpy as np
import pytest
from scipy.integrate import simpson

from PySSKLab.errors import DivergentIntegral, OutOfRegime
from PySSKLab.freeconv import FreeConvolution, SelfConsistentSolver, support_edges
from PySSKLab.methods import BISECTION, CLOSED_FORM, HIGH_TEMPERATURE, LOW_TEMPERATURE
from PySSKLab.measure import DiscreteMeasure, PointMass

TOL = 1e-9


def semicircle_m(z: complex) -> complex:
    root = np.sqrt(complex(z) ** 2 - 4)
    if (root / complex(z)).real < 0:
        root = -root
    return (-complex(z) + root) / 2


def fitted_edge_exponent(fc: FreeConvolution, side: str, gaps: np.ndarray, eta_schedule) -> float:
    """Least squares p of log ρ = p log x + q + r x at distances x from one edge."""
    gaps = np.sort(gaps)
    if side == "upper":
        grid = fc.density(fc.L_plus - gaps[::-1], eta_schedule)
        rho, failed = grid.rho[::-1], grid.failed[::-1]
    else:
        grid = fc.density(fc.L_minus + gaps, eta_schedule)
        rho, failed = grid.rho, grid.failed
    assert not failed.any()
    assert np.all(rho > 0)
    design = np.column_stack([np.log(gaps), np.ones(gaps.size), gaps])
    coefficients, *_ = np.linalg.lstsq(design, np.log(rho), rcond=None)
    return float(coefficients[0])


class TestSemicircle:
    def test_stieltjes_at_i(self, semicircle):
        assert semicircle.solve_mfc(1j) == pytest.approx(1j * (math.sqrt(5) - 1) / 2, abs=TOL)

    @pytest.mark.parametrize("z", [0.5 + 0.1j, -1.5 + 0.01j, 3.0 + 2.0j, -4.0 - 1.0j])
    def test_stieltjes_matches_closed_form(self, semicircle, z):
        assert semicircle.solve_mfc(z) == pytest.approx(semicircle_m(z), abs=1e-8)

    def test_real_axis_outside_support(self, semicircle):
        m = semicircle.solve_mfc(3.0)
        assert m == pytest.approx((-3 + math.sqrt(5)) / 2, abs=TOL)
        assert m.imag == 0

    def test_derivative(self, semicircle):
        assert semicircle.mfc_prime(3.0) == pytest.approx((-1 + 3 / math.sqrt(5)) / 2, abs=1e-8)

    def test_edges(self, semicircle):
        L_minus, L_plus, methods = support_edges(semicircle)
        assert L_plus == pytest.approx(2.0, abs=1e-6)
        assert L_minus == pytest.approx(-2.0, abs=1e-6)
        assert methods == (BISECTION, BISECTION)

    def test_density_matches_closed_form(self, semicircle):
        xs = np.linspace(-1.9, 1.9, 381)
        grid = semicircle.density(xs)
        assert not grid.failed.any()
        assert np.max(np.abs(grid.rho - np.sqrt(4 - xs**2) / (2 * math.pi))) < 5e-3

    def test_density_at_origin(self, semicircle):
        grid = semicircle.density(np.array([0.0, 1.0]))
        assert grid.rho[0] == pytest.approx(1 / math.pi, rel=1e-6)
        assert grid.rho[1] == pytest.approx(math.sqrt(3) / (2 * math.pi), rel=1e-6)

    def test_gamma_hat(self, semicircle):
        solution = semicircle.gamma_hat(0.25, with_variance=False)
        assert solution.gamma_hat == pytest.approx(2.5, abs=1e-8)
        assert solution.variance is None

    def test_no_critical_temperature(self, semicircle):
        with pytest.raises(DivergentIntegral):
            semicircle.beta_c()

    def test_edge_exponents(self, semicircle):
        assert semicircle.edge_exponents == (0.5, 0.5)

    def test_on_support_is_rejected(self, semicircle):
        with pytest.raises(ValueError):
            semicircle.solve_mfc(1.0)


class TestSolver:
    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            SelfConsistentSolver(PointMass(), 0.0)

    def test_lower_half_plane_is_conjugate(self, fc2):
        z = np.array([0.4 + 0.3j, 3.1 + 0.01j])
        assert np.allclose(fc2.solve_mfc(z.conj()), np.conj(fc2.solve_mfc(z)), atol=1e-12)

    def test_residual(self, fc2):
        z = np.array([0.1 + 1e-3j, 1.9 + 0.05j, -2.4 + 0.2j, 5.0 + 0j])
        m = fc2.solve_mfc(z)
        g1, _ = fc2.solver.moments(z + m)
        assert np.max(np.abs(m - g1)) < 1e-10

    def test_herglotz(self, fc2):
        x = np.linspace(-3.5, 3.5, 71)
        m = fc2.solve_mfc(x + 0.01j)
        assert np.all(m.imag > 0)

    def test_decay_at_infinity(self, fc2):
        z = 1e4j
        assert fc2.solve_mfc(z) * z == pytest.approx(-1.0, abs=1e-6)

    def test_converges_in_the_bulk_near_the_axis(self):
        solver = SelfConsistentSolver(PointMass(), 1.0)
        z = np.array([0.0, 0.5, -1.2, 1.9]) + 1e-13j
        m, _, _, converged = solver.solve(z)
        assert converged.all()
        assert m.imag == pytest.approx(np.sqrt(4 - z.real**2) / 2, abs=1e-8)

    def test_derivative_matches_finite_difference(self, fc2):
        z, h = np.linspace(-3.5, 3.5, 50) + 0.1j, 1e-6
        difference = (fc2.solve_mfc(z + h) - fc2.solve_mfc(z - h)) / (2 * h)
        assert fc2.mfc_prime(z) == pytest.approx(difference, rel=1e-5)


class TestQuarticJacobi:
    def test_closed_form_edges(self, fc2):
        assert fc2.L_plus == pytest.approx(2.625, abs=1e-10)
        assert fc2.L_minus == pytest.approx(-2.625, abs=1e-10)
        assert fc2.edge_methods == (CLOSED_FORM, CLOSED_FORM)

    def test_edge_identity(self, fc2):
        m = fc2.solve_mfc(fc2.L_plus + 1e-5)
        assert fc2.L_plus + m.real == pytest.approx(2.0, abs=1e-3)

    def test_edge_exponents(self, fc2):
        assert fc2.edge_exponents == (2.0, 2.0)

    def test_density_mass(self, fc2):
        assert fc2.grid.mass() == pytest.approx(1.0, abs=1e-3)
        assert not fc2.grid.failed.any()
        assert np.all(fc2.grid.rho >= 0)

    def test_density_is_symmetric(self, fc2):
        rho = fc2.grid.rho
        assert np.max(np.abs(rho - rho[::-1])) < 1e-6

    def test_edge_identity_from_density(self, fc2):
        grid = fc2.grid
        gap = grid.xs - fc2.L_plus
        integrand = np.divide(grid.rho, gap, out=np.zeros(gap.size), where=gap < 0)
        assert fc2.L_plus + simpson(integrand, x=grid.xs) == pytest.approx(fc2.lam, abs=1e-4)

    def test_density_vanishes_outside(self, fc2):
        grid = fc2.density(np.array([-3.0, 2.7, 3.0]))
        assert np.all(grid.rho == 0)

    def test_expectation(self, fc2):
        # the second moment of μ_sc ⊞ λμ is 1 + λ² E v²
        assert fc2.expectation(lambda x: np.ones_like(x)) == pytest.approx(1.0, abs=1e-12)
        assert fc2.expectation(lambda x: x) == pytest.approx(0.0, abs=1e-6)
        assert fc2.expectation(lambda x: x**2) == pytest.approx(1 + 4 / 7, rel=1e-3)

    def test_bad_eta_schedule(self, fc2):
        with pytest.raises(ValueError):
            fc2.density(np.array([0.0]), [1e-3, 1e-2])
        with pytest.raises(ValueError):
            fc2.density(np.array([0.0]), [1e-6, 1e-8])

    def test_summary(self, fc2):
        summary = fc2.summary()
        assert summary["L_plus"] == pytest.approx(2.625)
        assert summary["beta_c"] == pytest.approx(0.3125, rel=2e-3)
        assert summary["edge_methods"]["upper"] == CLOSED_FORM


class TestEdgeDecay:
    # windows sit where ρ is well above the extrapolation floor and the x^b law already dominates
    @pytest.mark.parametrize("side", ["lower", "upper"])
    def test_quartic_edges(self, fc2, side):
        schedule = 1e-5 * 0.5 ** np.arange(6)
        exponent = fitted_edge_exponent(fc2, side, np.geomspace(5e-4, 5e-3, 10), schedule)
        assert exponent == pytest.approx(2.0, abs=0.4)

    @pytest.mark.parametrize("side", ["lower", "upper"])
    def test_heavy_edges(self, fc12, side):
        schedule = 1e-3 * 0.5 ** np.arange(6)
        exponent = fitted_edge_exponent(fc12, side, np.geomspace(0.08, 0.2, 10), schedule)
        assert exponent == pytest.approx(12.0, abs=0.4)


class TestThermodynamics:
    def test_critical_temperature(self, fc2):
        assert fc2.beta_c() == pytest.approx(fc2.edges.tau_plus / (2 * fc2.lam), rel=2e-3)

    def test_critical_temperature_heavy_edge(self, fc12):
        assert fc12.beta_c() == pytest.approx(fc12.edges.tau_plus / (2 * fc12.lam), rel=2e-3)

    def test_critical_temperature_grid_refinement(self, jacobi12, fc12):
        fine = FreeConvolution(jacobi12, 2.0, grid_points=2 * fc12.grid.xs.size - 1)
        assert abs(fine.beta_c() - fc12.beta_c()) < 1e-4

    def test_gamma_hat_approaches_edge(self, fc12):
        critical = fc12.beta_c()
        near = fc12.gamma_hat(0.999 * critical, with_variance=False).gamma_hat - fc12.L_plus
        far = fc12.gamma_hat(0.99 * critical, with_variance=False).gamma_hat - fc12.L_plus
        assert 0 < near < far
        assert near < 5e-3

    def test_phase(self, fc2):
        assert fc2.phase(0.1) == HIGH_TEMPERATURE
        assert fc2.phase(1.0) == LOW_TEMPERATURE

    def test_gamma_hat_equation(self, fc2):
        solution = fc2.gamma_hat(0.2, with_variance=False)
        assert solution.gamma_hat > fc2.L_plus
        assert -fc2.solve_mfc(solution.gamma_hat).real == pytest.approx(0.4, abs=1e-8)

    def test_gamma_hat_grows_as_beta_falls(self, fc2):
        hot = fc2.gamma_hat(0.1, with_variance=False).gamma_hat
        warm = fc2.gamma_hat(0.25, with_variance=False).gamma_hat
        assert hot > warm > fc2.L_plus

    def test_gamma_hat_needs_high_temperature(self, fc2):
        with pytest.raises(OutOfRegime):
            fc2.gamma_hat(0.5)

    def test_gamma_hat_variance(self, fc2):
        solution = fc2.gamma_hat(0.2)
        assert solution.variance > 0
        assert solution.to_dict()["gamma_hat"] == solution.gamma_hat

    def test_low_temperature_slope(self, fc2):
        beta, h = 1.0, 1e-4
        slope = (fc2.limiting_free_energy(beta + h) - fc2.limiting_free_energy(beta - h)) / (2 * h)
        assert slope == pytest.approx(fc2.L_plus - 1 / (2 * beta), abs=1e-6)

    def test_high_temperature_slope(self, fc2):
        beta, h = 0.2, 1e-4
        gamma = fc2.gamma_hat(beta, with_variance=False).gamma_hat
        slope = (fc2.limiting_free_energy(beta + h) - fc2.limiting_free_energy(beta - h)) / (2 * h)
        assert slope == pytest.approx(gamma - 1 / (2 * beta), abs=1e-4)

    def test_continuous_at_transition(self, fc2):
        critical = fc2.beta_c()
        below = fc2.limiting_free_energy(0.99 * critical)
        above = fc2.limiting_free_energy(1.01 * critical)
        assert abs(above - below) < 0.01

    def test_log_integral_needs_point_above_support(self, fc2):
        with pytest.raises(ValueError):
            fc2.log_integral(0.0)


class TestClassicalLocations:
    N = 200

    def test_ordering_and_range(self, fc2):
        gammas, _ = fc2.classical_locations(self.N)
        assert np.all(np.diff(gammas) < 0)
        assert fc2.L_minus < gammas[-1] < gammas[0] < fc2.L_plus

    def test_symmetry(self, fc2):
        gammas, _ = fc2.classical_locations(self.N)
        assert np.max(np.abs(gammas + gammas[::-1])) < 1e-4

    def test_tail_mass(self, fc2):
        gammas, _ = fc2.classical_locations(self.N)
        index = np.arange(1, self.N + 1)
        assert np.allclose(fc2.upper_tail(gammas), (index - 0.5) / self.N, atol=1e-8)

    def test_quantile_function(self, fc2):
        gammas, quantile = fc2.classical_locations(self.N)
        for i in (1, 3, self.N):
            assert quantile(i - 0.5) == pytest.approx(gammas[i - 1], abs=1e-12)
        assert quantile(self.N / 2) == pytest.approx(0.0, abs=1e-4)
        assert fc2.upper_tail(quantile(20.0)) == pytest.approx(20.0 / self.N, abs=1e-8)
        with pytest.raises(ValueError):
            quantile(self.N + 1.0)
        with pytest.raises(ValueError):
            quantile(-0.5)

    def test_quantile_endpoints(self, fc2):
        _, quantile = fc2.classical_locations(self.N)
        assert quantile(0.0) == fc2.L_plus
        assert quantile(float(self.N)) == fc2.L_minus
        assert np.all(np.diff(quantile(np.linspace(0, self.N, 11))) < 0)

    def test_edge_spacing(self, fc12):
        N = 10_000
        gammas, _ = fc12.classical_locations(N)
        index = np.arange(1, N // 2 + 1)
        ratio = (fc12.L_plus - gammas[: N // 2]) / (index / N) ** (1 / (fc12.measure.b + 1))
        assert max(ratio.max(), 1 / ratio.min()) < 10

    def test_frame(self, fc2):
        frame = fc2.classical_frame(10)
        assert list(frame.columns) == ["i", "gamma_i"]
        assert frame["i"].tolist() == list(range(1, 11))


class TestHandle:
    def test_lazy_grid(self, jacobi2):
        fc = FreeConvolution(jacobi2, 2.0, grid_points=301, build=False)
        assert fc.L_plus == pytest.approx(2.625)
        assert fc.density_frame().shape == (301, 2)

    def test_rejects_nonpositive_lambda(self, jacobi2):
        with pytest.raises(ValueError):
            FreeConvolution(jacobi2, -1.0)

    def test_below_threshold_uses_bisection(self, jacobi2):
        # λ_+ = √2.5 > 1, so the upper edge is a square root edge found numerically
        fc = FreeConvolution(jacobi2, 1.0, grid_points=201)
        assert fc.edge_methods == (BISECTION, BISECTION)
        assert fc.edge_exponents == (0.5, 0.5)
        assert 2.0 < fc.L_plus < 3.0


class TestBisectionEdges:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_point_mass_gives_semicircle_edges(self, lam):
        fc = FreeConvolution(PointMass(), lam, grid_points=601)
        assert fc.edge_methods == (BISECTION, BISECTION)
        assert fc.L_plus == pytest.approx(2.0, abs=1e-6)
        assert fc.L_minus == pytest.approx(-2.0, abs=1e-6)
        assert fc.grid.mass() == pytest.approx(1.0, abs=2e-3)

    def test_uniform(self, uniform):
        fc = FreeConvolution(uniform, 0.5, grid_points=601)
        assert fc.edge_methods == (BISECTION, BISECTION)
        assert fc.L_minus == pytest.approx(-fc.L_plus, abs=1e-6)
        assert 2.0 < fc.L_plus < 2.5
        assert fc.grid.mass() == pytest.approx(1.0, abs=2e-3)

    def test_two_atoms(self):
        fc = FreeConvolution(DiscreteMeasure([-0.5, 0.5]), 1.0, grid_points=601)
        assert fc.edge_methods == (BISECTION, BISECTION)
        assert fc.L_minus == pytest.approx(-fc.L_plus, abs=1e-6)
        assert 2.0 < fc.L_plus < 3.0
        assert fc.grid.mass() == pytest.approx(1.0, abs=2e-3)
