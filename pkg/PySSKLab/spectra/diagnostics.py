from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import solve

from ..errors import MatrixNotRetained, NoConvergence
from ..freeconv import FreeConvolution, SelfConsistentSolver
from ..measure import DiscreteMeasure
from .sample import SpectralSample

LOCAL_LAW_MAX_N = 2000


def _off_axis(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag == 0):
        raise ValueError("z must be off the real axis.")
    return z


def empirical_stieltjes(sample: SpectralSample, z):
    """m_N(z) = (1/N) Σ 1/(λ_i - z) at every point of z."""
    z = _off_axis(z)
    values = np.mean(1.0 / (sample.eigs[:, None] - z.ravel()[None, :]), axis=0).reshape(z.shape)
    return complex(values) if values.ndim == 0 else values


def resolvent(sample: SpectralSample, z: complex) -> np.ndarray:
    """G(z) = (J - z)^{-1} by an LU solve against the identity.

    Raises:
        MatrixNotRetained: the sample was drawn without its matrix.
    """
    if sample.matrix is None:
        raise MatrixNotRetained(f"Sample seed={sample.seed} was drawn without retain_matrix.")
    z = complex(_off_axis(z))
    A = sample.matrix.astype(complex)
    A[np.diag_indices(sample.N)] -= z
    return solve(A, np.eye(sample.N, dtype=complex), check_finite=False)


def local_law_residual(sample: SpectralSample, z: complex, G: Optional[np.ndarray] = None) -> float:
    """Returns max_ij |G_ij(z) - δ_ij/(λv_i - z - m_N(z))|.

    Raises:
        MatrixNotRetained: the sample was drawn without its matrix.
    """
    if sample.N > LOCAL_LAW_MAX_N:
        raise ValueError(f"Local law residual needs N <= {LOCAL_LAW_MAX_N}, got {sample.N}.")
    if abs(complex(z).imag) <= sample.N ** -0.25:
        raise ValueError(f"|Im z| must exceed N^(-1/4) = {sample.N ** -0.25:.4f}, got {complex(z).imag:g}.")
    if G is None:
        G = resolvent(sample, z)
    m_N = empirical_stieltjes(sample, z)
    difference = G.copy()
    difference[np.diag_indices(sample.N)] -= 1.0 / (sample.lam * sample.v - z - m_N)
    return float(np.abs(difference).max())


def ward_residual(G: np.ndarray, z: complex) -> float:
    """Returns max_i |Σ_j |G_ij|² - Im G_ii / Im z|."""
    z = complex(_off_axis(z))
    return float(np.abs((np.abs(G) ** 2).sum(axis=1) - G.diagonal().imag / z.imag).max())


def symmetry_residual(G: np.ndarray) -> float:
    """Returns max_ij |G_ij - G_ji|."""
    return float(np.abs(G - G.T).max())


def hat_mfc(sample: SpectralSample, z, tol: Optional[float] = None, return_prime: bool = False):
    """Finite N free convolution: the self-consistent solution for (1/N) Σ δ_{v_i}.

    Args:
        sample (SpectralSample): the sample whose diagonal defines the empirical measure.
        z: point or array off the real axis.
        tol (Optional[float], optional): solver tolerance. Defaults to the laboratory setting.
        return_prime (bool, optional): also return m̂' from (1 + m̂')(1 - (1/N) Σ ĝ_i²) = 1. Defaults to False.

    Raises:
        NoConvergence: the solver failed at some point.
    """
    if sample.lam <= 0:
        raise ValueError("m̂_fc needs λ > 0.")
    z = _off_axis(z)
    solver = SelfConsistentSolver(DiscreteMeasure(sample.v), sample.lam, tol)
    m, g2, _, converged = solver.solve(z)
    if not np.all(converged):
        raise NoConvergence(f"m̂_fc did not converge for sample seed={sample.seed}.")
    if m.ndim == 0:
        m, g2 = complex(m), complex(g2)
    if return_prime:
        return m, g2 / (1.0 - g2)
    return m


def trace_law_residual(sample: SpectralSample, z) -> np.ndarray:
    """Returns |m_N(z) - m̂_fc(z)|."""
    return np.abs(empirical_stieltjes(sample, z) - hat_mfc(sample, z))


@dataclass(frozen=True)
class RigidityReport:
    """Eigenvalue deviations from the classical locations in the two bulk windows.

    Windows are 1-based index ranges; a window that is empty at this N has
    deviation 0.
    """

    N: int
    zeta: float
    epsilon: float
    upper_window: Tuple[int, int]
    lower_window: Tuple[int, int]
    max_bulk_dev: float
    upper_bound: float
    max_lower_dev: float
    lower_bound: float
    mid_dev: float
    indices_checked: int

    @property
    def passed(self) -> bool:
        return self.max_bulk_dev <= self.upper_bound and self.max_lower_dev <= self.lower_bound

    def to_dict(self) -> dict:
        record = asdict(self)
        record["passed"] = self.passed
        return record


def _window_deviation(eigs: np.ndarray, gammas: np.ndarray, low: int, high: int) -> float:
    if high < low:
        return 0.0
    return float(np.abs(eigs[low - 1 : high] - gammas[low - 1 : high]).max())


def rigidity_report(
    sample: SpectralSample,
    fc: FreeConvolution,
    zeta: float,
    kappa: float = 1.0,
    epsilon: Optional[float] = None,
    gammas: Optional[np.ndarray] = None,
) -> RigidityReport:
    """Compare eigenvalues with classical locations away from the edges.

    The upper window is i in [⌈κN^{1-ζ(b+1)}⌉, N/2] with bound N^{-1/4+ε+ζb},
    the lower window i in [N/2, N - κN^{1-ζ(a+1)}] with bound N^{-1/4+ε+ζa},
    where a and b are the edge decay exponents of ρ_fc.

    Args:
        sample (SpectralSample): the sampled spectrum.
        fc (FreeConvolution): the limiting law.
        zeta (float): the window exponent ζ.
        kappa (float, optional): the window constant κ'. Defaults to 1.0.
        epsilon (Optional[float], optional): the bound exponent ε. Defaults to 1/(b+1) + 0.01.
        gammas (Optional[np.ndarray], optional): precomputed classical locations for this N.
    """
    N = sample.N
    a, b = fc.edge_exponents
    if epsilon is None:
        epsilon = 1.0 / (b + 1) + 0.01
    if gammas is None:
        gammas, _ = fc.classical_locations(N)
    half = N // 2
    upper = (max(1, math.ceil(kappa * N ** (1 - zeta * (b + 1)))), half)
    lower = (max(1, half), min(N, math.floor(N - kappa * N ** (1 - zeta * (a + 1)))))
    upper_dev = _window_deviation(sample.eigs, gammas, *upper)
    lower_dev = _window_deviation(sample.eigs, gammas, *lower)
    return RigidityReport(
        N=N,
        zeta=float(zeta),
        epsilon=float(epsilon),
        upper_window=upper,
        lower_window=lower,
        max_bulk_dev=upper_dev,
        upper_bound=N ** (-0.25 + epsilon + zeta * b),
        max_lower_dev=lower_dev,
        lower_bound=N ** (-0.25 + epsilon + zeta * a),
        mid_dev=float(abs(sample.eigs[half - 1] - gammas[half - 1])),
        indices_checked=max(0, upper[1] - upper[0] + 1) + max(0, lower[1] - lower[0] + 1),
    )


def eigenvalue_frame(samples: Iterable[SpectralSample]) -> pd.DataFrame:
    """Stack eigenvalues into a trial, i, lambda_i frame."""
    frame = pd.DataFrame(
        {
            "trial": pd.Series(dtype="int"),
            "i": pd.Series(dtype="int"),
            "lambda_i": pd.Series(dtype="float"),
        }
    )
    blocks = [
        pd.DataFrame(
            {
                "trial": trial,
                "i": np.arange(1, sample.N + 1),
                "lambda_i": sample.eigs,
            }
        )
        for trial, sample in enumerate(samples)
    ]
    if blocks:
        frame = pd.concat(blocks, ignore_index=True)
    return frame
