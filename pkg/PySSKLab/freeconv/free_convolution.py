from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid, simpson, trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from ..core import lab
from ..errors import DivergentIntegral, NoConvergence, OutOfRegime, SingularDerivative
from ..logger import LOGGER
from ..measure import EdgeConstants, JacobiMeasure, Measure, edge_constants
from ..methods import HIGH_TEMPERATURE, LOW_TEMPERATURE
from .edges import support_edges
from .solver import SelfConsistentSolver

SUPPORT_MARGIN = 1e-6
MASS_TOL = 1e-3
DERIVATIVE_FLOOR = 1e-10
GAMMA_HAT_TOL = 1e-8
MIN_ETA = 1e-7
QUANTILE_BISECTIONS = 80


@dataclass(frozen=True)
class DensityGrid:
    """Density of μ_fc on a sorted grid, recovered from Im m_fc(x + iη)/π."""

    xs: np.ndarray
    rho: np.ndarray
    eta_used: float
    failed: np.ndarray

    def mass(self) -> float:
        """Returns the trapezoid mass of the grid."""
        return float(trapezoid(self.rho, x=self.xs))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.xs, "rho": self.rho})


@dataclass(frozen=True)
class HighTempSolution:
    beta: float
    gamma_hat: float
    F_limit: float
    variance: Optional[float]

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "gamma_hat": self.gamma_hat,
            "F_limit": self.F_limit,
            "variance": self.variance,
        }


def _extrapolate_to_zero(etas: np.ndarray, values: np.ndarray) -> np.ndarray:
    # Neville's scheme evaluated at η = 0, one column per grid point
    table = np.array(values, dtype=float)
    for level in range(1, etas.size):
        for i in range(etas.size - level):
            table[i] = (etas[i] * table[i + 1] - etas[i + level] * table[i]) / (etas[i] - etas[i + level])
    return table[0]


class FreeConvolution:
    """Handle on μ_fc = μ_sc ⊞ λμ for a fixed base measure and λ.

    Construction computes the edge constants, the support edges and the
    density grid over [L_-, L_+]; the handle is read-only afterwards and every
    query is re-entrant.
    """

    _measure: Measure
    _lam: float
    _edges: EdgeConstants
    _L_minus: float
    _L_plus: float

    def __init__(
        self,
        measure: Measure,
        lam: float,
        solver_tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        grid_points: Optional[int] = None,
        eta_schedule: Optional[Sequence[float]] = None,
        build: bool = True,
    ) -> None:
        """Solve for the free convolution of the semicircle law with λμ.

        Args:
            measure (Measure): the base measure μ of the diagonal entries.
            lam (float): the strength λ > 0.
            solver_tol (Optional[float], optional): residual tolerance of the self-consistent equation. Defaults to the laboratory setting.
            max_iter (Optional[int], optional): iteration cap. Defaults to the laboratory setting.
            grid_points (Optional[int], optional): density grid size. Defaults to the laboratory setting.
            eta_schedule (Optional[Sequence[float]], optional): extrapolation schedule. Defaults to the laboratory setting.
            build (bool, optional): precompute the density grid now. Defaults to True.
        """
        if lam <= 0:
            raise ValueError(f"λ must be positive, got {lam}.")
        self._measure = measure
        self._lam = float(lam)
        self._solver = SelfConsistentSolver(measure, lam, solver_tol, max_iter)
        self._grid_points = int(grid_points or lab.grid_points)
        self._eta_schedule = tuple(lab.eta_schedule if eta_schedule is None else eta_schedule)
        self._edges = edge_constants(measure, lam)
        self._L_minus, self._L_plus, self._edge_methods = support_edges(
            measure, self._lam, self._edges, self._solver
        )
        if self._L_minus < -2 - self._lam - 1e-8 or self._L_plus > 2 + self._lam + 1e-8:
            LOGGER.warning(
                f"FreeConvolution λ={self._lam:g}: support [{self._L_minus:.6f}, {self._L_plus:.6f}] leaves [-2-λ, 2+λ]."
            )
        self._grid: Optional[DensityGrid] = None
        self._mass: Optional[float] = None
        self._cdf: Optional[PchipInterpolator] = None
        self._beta_c: Optional[float] = None
        self._log_edge: Optional[float] = None
        if build:
            self._build()
        LOGGER.info(
            f"FreeConvolution {measure!r}, λ={self._lam:g}: L-={self._L_minus:.10f} ({self._edge_methods[0]}), L+={self._L_plus:.10f} ({self._edge_methods[1]})."
        )

    def _build(self) -> None:
        xs = np.linspace(self._L_minus, self._L_plus, self._grid_points)
        self._grid = self.density(xs, self._eta_schedule)
        self._mass = float(simpson(self._grid.rho, x=xs))
        trapezoid_mass = self._grid.mass()
        if abs(trapezoid_mass - 1) > MASS_TOL:
            LOGGER.warning(f"FreeConvolution λ={self._lam:g}: density grid mass {trapezoid_mass:.6f} is off by more than {MASS_TOL:g}.")
        cdf = cumulative_trapezoid(self._grid.rho, xs, initial=0.0)
        self._cdf = PchipInterpolator(xs, cdf / cdf[-1])

    @property
    def measure(self) -> Measure:
        """Returns the base measure μ."""
        return self._measure

    @property
    def lam(self) -> float:
        """Returns λ."""
        return self._lam

    @property
    def edges(self) -> EdgeConstants:
        """Returns λ_±, τ_± and the Weibull constants."""
        return self._edges

    @property
    def L_minus(self) -> float:
        """Returns the lower edge of the support."""
        return self._L_minus

    @property
    def L_plus(self) -> float:
        """Returns the upper edge of the support."""
        return self._L_plus

    @property
    def edge_methods(self) -> Tuple[str, str]:
        """Returns how the lower and upper edges were obtained."""
        return self._edge_methods

    @property
    def solver(self) -> SelfConsistentSolver:
        return self._solver

    @property
    def solver_tol(self) -> float:
        return self._solver.tol

    @property
    def max_iter(self) -> int:
        return self._solver.max_iter

    @property
    def grid(self) -> DensityGrid:
        """Returns the density grid over [L_-, L_+]."""
        if self._grid is None:
            self._build()
        return self._grid

    @property
    def edge_exponents(self) -> Tuple[float, float]:
        """Returns the decay exponents of ρ_fc at L_- and L_+.

        A Jacobi exponent above 1 together with λ above the matching
        threshold gives the x^a or x^b decay; every other edge is a square root.
        """
        lower = upper = 0.5
        if isinstance(self._measure, JacobiMeasure):
            if self._measure.a > 1 and self._edges.above_minus:
                lower = self._measure.a
            if self._measure.b > 1 and self._edges.above_plus:
                upper = self._measure.b
        return lower, upper

    def _check_off_support(self, z: np.ndarray) -> None:
        on_axis = z.imag == 0
        inside = on_axis & (z.real >= self._L_minus - SUPPORT_MARGIN) & (z.real <= self._L_plus + SUPPORT_MARGIN)
        if np.any(inside):
            raise ValueError(
                f"z={z[inside].ravel()[0].real:.10g} is within {SUPPORT_MARGIN:g} of the support [{self._L_minus:.6f}, {self._L_plus:.6f}]."
            )

    def _solve(self, z) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        self._check_off_support(z)
        m, g2, residual, converged = self._solver.solve(z)
        if not np.all(converged):
            worst = z[~converged].ravel()[0]
            raise NoConvergence(
                f"Self-consistent equation did not reach {self._solver.tol:g} at z={worst:.6g} within {self._solver.max_iter} iterations (residual {np.max(residual[~converged]):.3e})."
            )
        return m, g2

    def solve_mfc(self, z):
        """Stieltjes transform m_fc(z) of μ_fc.

        Args:
            z: complex point or array, off the real axis or real and at least 1e-6 away from [L_-, L_+].

        Raises:
            NoConvergence: the iteration cap was reached before the tolerance.
        """
        m, _ = self._solve(z)
        return complex(m) if m.ndim == 0 else m

    def mfc_prime(self, z):
        """m_fc'(z) from (1 + m')(1 - ∫ dμ/(λt - z - m)²) = 1.

        Raises:
            SingularDerivative: |1 - ∫ dμ/(λt - z - m)²| < 1e-10.
        """
        _, g2 = self._solve(z)
        denominator = 1.0 - g2
        if np.any(np.abs(denominator) < DERIVATIVE_FLOOR):
            raise SingularDerivative("1 - ∫ dμ/(λt - z - m)² vanishes, z sits on a spectral edge.")
        prime = g2 / denominator
        return complex(prime) if prime.ndim == 0 else prime

    def solve_with_prime(self, z) -> Tuple[np.ndarray, np.ndarray]:
        """Returns m_fc and m_fc' at every z in one solve."""
        m, g2 = self._solve(z)
        denominator = 1.0 - g2
        if np.any(np.abs(denominator) < DERIVATIVE_FLOOR):
            raise SingularDerivative("1 - ∫ dμ/(λt - z - m)² vanishes, z sits on a spectral edge.")
        return m, g2 / denominator

    def density(self, xs, eta_schedule: Optional[Sequence[float]] = None) -> DensityGrid:
        """Density ρ_fc on a sorted grid by Richardson extrapolation in η.

        Im m_fc(x + iη)/π is computed at every η of the schedule and
        extrapolated to η = 0. Points outside (L_-, L_+) get zero, points
        where the solver fails are flagged and set to zero.
        """
        xs = np.asarray(xs, dtype=float)
        if np.any(np.diff(xs) < 0):
            raise ValueError("Density grid must be sorted.")
        schedule = np.asarray(self._eta_schedule if eta_schedule is None else eta_schedule, dtype=float)
        if np.any(schedule <= 0) or np.any(np.diff(schedule) >= 0):
            raise ValueError("η schedule must be positive and strictly decreasing.")
        if schedule[-1] < MIN_ETA:
            raise ValueError(f"η schedule must end at or above {MIN_ETA:g}, got {schedule[-1]:g}.")

        inside = (xs > self._L_minus) & (xs < self._L_plus)
        points = xs[inside]
        values = np.empty((schedule.size, points.size))
        ok = np.ones(points.size, dtype=bool)
        m = None
        for k, eta in enumerate(schedule):
            z = points + 1j * eta
            if m is None:
                m, _, _, converged = self._solver.solve(z)
            else:
                m, _, _, converged = self._solver.iterate(z, m)
            ok &= converged
            values[k] = m.imag / math.pi

        rho = np.zeros(xs.size)
        rho[inside] = np.maximum(_extrapolate_to_zero(schedule, values), 0.0)
        failed = np.zeros(xs.size, dtype=bool)
        failed[inside] = ~ok
        if failed.any():
            LOGGER.warning(f"FreeConvolution λ={self._lam:g}: density failed at {failed.sum()} grid points, set to zero.")
            rho[failed] = 0.0
        return DensityGrid(xs=xs, rho=rho, eta_used=float(schedule[-1]), failed=failed)

    def expectation(self, f: Callable) -> float:
        """Returns ∫ f dμ_fc by Simpson's rule on the density grid."""
        grid = self.grid
        return float(simpson(f(grid.xs) * grid.rho, x=grid.xs) / self._mass)

    def log_integral(self, point: float) -> float:
        """Returns ∫ log(point - t) dμ_fc(t) for point >= L_+."""
        if point < self._L_plus:
            raise ValueError(f"log integral needs point >= L_+ = {self._L_plus:.10f}, got {point}.")
        grid = self.grid
        gap = point - grid.xs
        integrand = np.zeros(gap.size)
        positive = gap > 0
        integrand[positive] = np.log(gap[positive]) * grid.rho[positive]
        return float(simpson(integrand, x=grid.xs) / self._mass)

    def beta_c(self) -> float:
        """Critical inverse temperature β_c = ½ ∫ ρ_fc(t)/(L_+ - t) dt.

        Raises:
            DivergentIntegral: the measure is not Jacobi with b > 1 and λ > λ_+.
        """
        if self._beta_c is None:
            b = self._measure.b
            if b is None or b <= 1 or not self._edges.above_plus:
                raise DivergentIntegral(
                    f"β_c needs b > 1 and λ > λ_+, got b={b}, λ={self._lam:g}, λ_+={self._edges.lambda_plus:g}."
                )
            grid = self.grid
            gap = self._L_plus - grid.xs
            integrand = np.divide(grid.rho, gap, out=np.zeros(gap.size), where=gap > 0)
            value = 0.5 * float(simpson(integrand, x=grid.xs)) / self._mass
            closed = self._edges.tau_plus / (2 * self._lam)
            if abs(value - closed) > 1e-3 * closed:
                LOGGER.warning(f"FreeConvolution λ={self._lam:g}: β_c={value:.8f} differs from τ_+/(2λ)={closed:.8f}.")
            else:
                LOGGER.debug(f"FreeConvolution λ={self._lam:g}: β_c={value:.10f}, τ_+/(2λ)={closed:.10f}.")
            self._beta_c = value
        return self._beta_c

    def _gamma_hat_root(self, beta: float) -> float:
        def excess(gamma: float) -> float:
            return -self.solve_mfc(gamma + 0j).real - 2 * beta

        left = self._L_plus + 2 * SUPPORT_MARGIN
        if excess(left) <= 0:
            raise OutOfRegime(f"No γ̂ for β={beta:g}: ∫ dμ_fc/(γ - t) stays below 2β on (L_+, ∞).")
        width = 10.0
        while excess(self._L_plus + width) > 0:
            width *= 2
        return brentq(excess, left, self._L_plus + width, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)

    def gamma_hat(self, beta: float, with_variance: bool = True) -> HighTempSolution:
        """High temperature saddle γ̂ > L_+ with ∫ dμ_fc(t)/(γ̂ - t) = 2β.

        Args:
            beta (float): inverse temperature, 0 < β < β_c.
            with_variance (bool, optional): also evaluate the fluctuation variance. Defaults to True.

        Raises:
            OutOfRegime: β >= β_c, the low temperature phase has no γ̂.
        """
        if beta <= 0:
            raise ValueError(f"β must be positive, got {beta}.")
        try:
            critical = self.beta_c()
        except DivergentIntegral:
            critical = None
        if critical is not None and beta >= critical:
            raise OutOfRegime(f"β={beta:g} is not below β_c={critical:.8f}, γ̂ exists only at high temperature.")
        gamma = self._gamma_hat_root(beta)
        residual = abs(-self.solve_mfc(gamma + 0j).real - 2 * beta)
        if residual > GAMMA_HAT_TOL:
            LOGGER.warning(f"FreeConvolution λ={self._lam:g}: γ̂ residual {residual:.3e} at β={beta:g}.")
        F_limit = self._free_energy_high(beta, gamma)
        variance = None
        if with_variance:
            from .clt import clt_variance

            variance = clt_variance(self, partial(_log_gap, gamma), singularities=(gamma,))
        return HighTempSolution(beta=float(beta), gamma_hat=float(gamma), F_limit=F_limit, variance=variance)

    def _free_energy_high(self, beta: float, gamma: float) -> float:
        return -0.5 * math.log(2 * math.e * beta) - 0.5 * self.log_integral(gamma) + beta * gamma

    def limiting_free_energy(self, beta: float) -> float:
        """Limit F(β) of the free energy, switching branch at β_c."""
        if beta <= 0:
            raise ValueError(f"β must be positive, got {beta}.")
        if beta < self.beta_c():
            try:
                return self._free_energy_high(beta, self._gamma_hat_root(beta))
            except OutOfRegime:
                # β sits between the grid β_c and -m_fc(L_+)/2, where γ̂ has merged with L_+
                LOGGER.debug(f"FreeConvolution λ={self._lam:g}: no γ̂ above L_+ at β={beta:g}, using the edge branch.")
        if self._log_edge is None:
            self._log_edge = self.log_integral(self._L_plus)
        return -0.5 * math.log(2 * math.e * beta) - 0.5 * self._log_edge + beta * self._L_plus

    def phase(self, beta: float) -> str:
        """Returns the temperature phase of β."""
        return LOW_TEMPERATURE if beta >= self.beta_c() else HIGH_TEMPERATURE

    def upper_tail(self, x) -> np.ndarray:
        """Returns μ_fc([x, ∞)) from the interpolated distribution function."""
        self.grid
        x = np.clip(np.asarray(x, dtype=float), self._L_minus, self._L_plus)
        return 1.0 - self._cdf(x)

    def quantile(self, y, N: int):
        """γ̂_y with μ_fc([γ̂_y, ∞)) = y/N for real y in [0, N].

        The endpoints are pinned to the support, γ̂_0 = L_+ and γ̂_N = L_-.
        """
        self.grid
        y = np.asarray(y, dtype=float)
        levels = y / N
        if np.any(levels < 0) or np.any(levels > 1):
            raise ValueError(f"Quantile index must lie in [0, N] with N={N}.")
        target = 1.0 - levels
        low = np.full(levels.shape, self._L_minus)
        high = np.full(levels.shape, self._L_plus)
        for _ in range(QUANTILE_BISECTIONS):
            middle = 0.5 * (low + high)
            below = self._cdf(middle) < target
            low = np.where(below, middle, low)
            high = np.where(below, high, middle)
        values = np.where(y == 0, self._L_plus, np.where(y == N, self._L_minus, 0.5 * (low + high)))
        return float(values) if values.ndim == 0 else values

    def classical_locations(self, N: int) -> Tuple[np.ndarray, Callable]:
        """Classical locations γ_i = γ̂_{i-1/2}, γ_1 >= … >= γ_N, and y -> γ̂_y.

        Returns:
            Tuple: the array of γ_i and the quantile function y -> γ̂_y for this N.
        """
        if N < 1:
            raise ValueError(f"N must be positive, got {N}.")
        self.grid
        gammas = self.quantile(np.arange(1, N + 1, dtype=float) - 0.5, N)
        return gammas, partial(self.quantile, N=N)

    def density_frame(self) -> pd.DataFrame:
        """Returns the density grid as an x, rho frame."""
        return self.grid.to_frame()

    def classical_frame(self, N: int) -> pd.DataFrame:
        gammas, _ = self.classical_locations(N)
        return pd.DataFrame({"i": np.arange(1, N + 1), "gamma_i": gammas})

    def summary(self) -> dict:
        """Returns the edges, thresholds and β_c as a JSON-ready dictionary."""
        try:
            critical = self.beta_c()
        except DivergentIntegral:
            critical = None
        summary = {
            "lambda": self._lam,
            "L_minus": self._L_minus,
            "L_plus": self._L_plus,
            "edge_methods": {"lower": self._edge_methods[0], "upper": self._edge_methods[1]},
            "beta_c": critical,
            "mass": self.grid.mass(),
        }
        summary.update(self._edges.to_dict())
        summary.pop("lam")
        return summary


def _log_gap(gamma: float, xi):
    return np.log(gamma - xi)
