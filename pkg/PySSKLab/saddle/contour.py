from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gammaln

from ..errors import QuadratureFailure
from ..logger import LOGGER
from ..methods import K_METHODS, LAPLACE, STEEPEST_DESCENT, VERTICAL_LINE
from ..spectra import eigenvalues_of
from .saddle import R_derivative, R_eval, saddle_gamma, steepest_curve

INTEGRAND_CUTOFF = 1e-18
TRUNCATION_BOUND = 1e-16
K_CAP = 20.0
QUAD_RTOL = 1e-10
QUAD_LIMIT = 200
MAX_SEGMENTS = 100000


@dataclass(frozen=True)
class SaddleData:
    """Saddle point quantities of one spectrum at one β."""

    N: int
    beta: float
    gamma: float
    R_gamma: float
    R2: float
    K: float
    method: str

    def free_energy(self, exact: bool = False) -> float:
        """F_N from the contour representation.

        The default uses C_N ≈ √N β/(i√π (2βe)^{N/2}); exact evaluates the
        normalization Γ(N/2)/(2πi (Nβ)^{N/2-1}) through log Γ.
        """
        N = self.N
        if exact:
            return (
                self.R_gamma / 2
                + (gammaln(N / 2) - math.log(2 * math.pi) - (N / 2 - 1) * math.log(N * self.beta) + math.log(self.K)) / N
            )
        return (
            self.R_gamma / 2
            - 0.5 * math.log(2 * self.beta * math.e)
            + math.log(math.sqrt(N / math.pi) * self.beta * self.K) / N
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _quad_segment(integrand, low: float, high: float) -> float:
    value, error, info, *rest = quad(integrand, low, high, epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT, full_output=1)
    if rest and abs(error) > 1e-8 * max(abs(value), 1e-300):
        raise QuadratureFailure(f"Quadrature on [{low:.6g}, {high:.6g}] failed: {rest[0]}")
    return value


def _steepest_descent_K(eigs: np.ndarray, beta: float, gamma: float, R_gamma: float, R2: float) -> float:
    N = eigs.size
    end = math.pi / (2 * beta)

    def integrand(y: float) -> float:
        x = steepest_curve(eigs, beta, y, gamma)
        return math.exp(0.5 * N * (R_eval(eigs, beta, complex(x, y)).real - R_gamma))

    # segments double from the Laplace width of the peak at y = 0
    sigma = min(math.sqrt(2.0 / (N * R2)), end / 2)
    total = 0.0
    low, high = 0.0, sigma
    while True:
        high = min(high, end * (1 - 1e-12))
        total += _quad_segment(integrand, low, high)
        if high >= end * (1 - 1e-12) or integrand(high) < INTEGRAND_CUTOFF:
            break
        low, high = high, 2 * high
    return 2 * total


def _vertical_line_K(eigs: np.ndarray, beta: float, gamma: float, R_gamma: float, R2: float) -> float:
    N = eigs.size
    if N < 3:
        raise QuadratureFailure(f"The vertical line integral diverges for N={N} < 3.")
    distances = gamma - eigs

    def log_bound(t: float) -> float:
        # log of ∏ (1 + t²/d_i²)^(-1/4) minus the truncation level
        return -0.25 * float(np.sum(np.log1p((t / distances) ** 2))) - math.log(TRUNCATION_BOUND)

    sigma = math.sqrt(2.0 / (N * R2))
    high = sigma
    while log_bound(high) > 0:
        high *= 2
    T = brentq(log_bound, 0.0, high)

    def integrand(t: float) -> float:
        return (np.exp(0.5 * N * (R_eval(eigs, beta, complex(gamma, t)) - R_gamma))).real

    period = math.pi / beta
    breakpoints = [0.0]
    step = sigma
    while breakpoints[-1] + step < T and step < period:
        breakpoints.append(breakpoints[-1] + step)
        step *= 2
    count = math.ceil((T - breakpoints[-1]) / period)
    if count > MAX_SEGMENTS:
        raise QuadratureFailure(f"Truncation T={T:.3e} needs {count} segments of the vertical line.")
    breakpoints.extend(np.linspace(breakpoints[-1], T, count + 1)[1:].tolist())
    return 2 * sum(_quad_segment(integrand, low, high) for low, high in zip(breakpoints[:-1], breakpoints[1:]))


def contour_K(sample, beta: float, method: str = STEEPEST_DESCENT, gamma: Optional[float] = None) -> float:
    """K = -i e^{-NR(γ)/2} ∫ e^{NR(z)/2} dz over a contour through γ.

    steepest_descent integrates 2 exp(N(R(h(y) + iy) - R(γ))/2) over
    [0, π/(2β)); vertical_line integrates along Re z = γ up to the height
    where ∏ (1 + t²/(γ - λ_i)²)^(-1/4) drops below 1e-16; laplace is the
    Gaussian approximation √(4π/(N R''(γ))).

    Raises:
        QuadratureFailure: a quadrature segment did not reach its tolerance.
    """
    if method not in K_METHODS:
        raise ValueError(f"Unknown K method {method!r}, expected one of {', '.join(K_METHODS)}.")
    eigs = eigenvalues_of(sample)
    N = eigs.size
    if gamma is None:
        gamma = saddle_gamma(eigs, beta)
    R2 = float(R_derivative(eigs, beta, gamma, 2))
    if method == LAPLACE:
        K = math.sqrt(4 * math.pi / (N * R2))
    else:
        R_gamma = R_eval(eigs, beta, gamma + 0j).real
        if method == STEEPEST_DESCENT:
            K = _steepest_descent_K(eigs, beta, gamma, R_gamma, R2)
        elif method == VERTICAL_LINE:
            K = _vertical_line_K(eigs, beta, gamma, R_gamma, R2)
    if not N**-10 <= K <= K_CAP:
        LOGGER.warning(f"K={K:.6g} ({method}) is outside [N^-10, {K_CAP:g}] for N={N}, β={beta:g}.")
    return K


def saddle_data(sample, beta: float, method: str = STEEPEST_DESCENT) -> SaddleData:
    """γ, R(γ), R''(γ) and K of one spectrum at one β."""
    eigs = eigenvalues_of(sample)
    gamma = saddle_gamma(eigs, beta)
    return SaddleData(
        N=int(eigs.size),
        beta=float(beta),
        gamma=gamma,
        R_gamma=R_eval(eigs, beta, gamma + 0j).real,
        R2=float(R_derivative(eigs, beta, gamma, 2)),
        K=contour_K(eigs, beta, method, gamma),
        method=method,
    )


def free_energy(sample, beta: float, method: str = STEEPEST_DESCENT, exact: bool = False) -> float:
    """Free energy F_N = (1/N) log ∫_{S^{N-1}} exp(β⟨σ, Jσ⟩) dω(σ) of one spectrum."""
    if beta <= 0:
        raise ValueError(f"β must be positive, got {beta}.")
    return saddle_data(sample, beta, method).free_energy(exact)


def laplace_error(sample, beta: float, method: str = STEEPEST_DESCENT) -> float:
    """Returns w_N = K √(N R''(γ)/(4π)) - 1."""
    data = saddle_data(sample, beta, method)
    return data.K * math.sqrt(data.N * data.R2 / (4 * math.pi)) - 1.0
