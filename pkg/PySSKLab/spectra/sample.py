from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh, eigvalsh

from ..core import lab
from ..errors import SpectrumError
from ..logger import LOGGER
from ..measure import Measure

TRACE_TOL = 1e-8
BOUND_SLACK = 0.5
EIGENPAIR_TOL = 1e-10
EIGENPAIR_CHECKS = 5


@dataclass(frozen=True)
class SpectralSample:
    """One draw of J = W + λV with its spectrum.

    eigs is sorted in descending order. matrix holds the dense J only when
    the sample was drawn with retain_matrix.
    """

    lam: float
    v: np.ndarray
    eigs: np.ndarray
    seed: int
    matrix: Optional[np.ndarray] = None

    @property
    def N(self) -> int:
        return int(self.eigs.size)

    @property
    def lambda_1(self) -> float:
        """Returns the largest eigenvalue."""
        return float(self.eigs[0])

    @property
    def lambda_N(self) -> float:
        """Returns the smallest eigenvalue."""
        return float(self.eigs[-1])

    def without_matrix(self) -> SpectralSample:
        return SpectralSample(lam=self.lam, v=self.v, eigs=self.eigs, seed=self.seed)


def goe(rng: np.random.Generator, N: int) -> np.ndarray:
    """GOE matrix with E W_ij² = (1 + δ_ij)/N."""
    G = rng.standard_normal((N, N))
    return (G + G.T) / np.sqrt(2 * N)


def _verify_eigenpairs(J: np.ndarray, eigs: np.ndarray) -> None:
    scale = np.linalg.norm(J, 2)
    for index in np.unique(np.linspace(0, eigs.size - 1, EIGENPAIR_CHECKS).astype(int)):
        theta, q = eigh(J, subset_by_index=[index, index])
        residual = np.linalg.norm(J @ q[:, 0] - theta[0] * q[:, 0])
        if residual > EIGENPAIR_TOL * scale:
            raise SpectrumError(f"Eigenpair {index} has residual {residual:.3e} above {EIGENPAIR_TOL:g}·‖J‖.")


def sample_matrix(
    measure: Measure, lam: float, N: int, seed: int, retain_matrix: bool = False
) -> SpectralSample:
    """Draw J = W + λV and compute its eigenvalues.

    W is drawn first from default_rng(seed), then the diagonal v of V, so
    equal seeds give bit-identical samples. Eigenvalues come from the
    LAPACK symmetric QR driver, which tridiagonalizes J by Householder
    reflections and runs implicit shifted QL/QR.

    Args:
        measure (Measure): the law of the diagonal entries v_i.
        lam (float): λ >= 0.
        N (int): the dimension, at least 2.
        seed (int): seed of the trial's random stream.
        retain_matrix (bool, optional): keep the dense J for resolvent diagnostics. Defaults to False.

    Raises:
        SpectrumError: the eigenvalue sum misses the trace by more than 1e-8.
    """
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}.")
    if lam < 0:
        raise ValueError(f"λ must be nonnegative, got {lam}.")
    rng = np.random.default_rng(seed)
    J = goe(rng, N)
    v = np.asarray(measure.sample(rng, N), dtype=float)
    J[np.diag_indices(N)] += lam * v
    eigs = eigvalsh(J, driver="ev")[::-1].copy()

    trace = float(np.trace(J))
    if abs(eigs.sum() - trace) > TRACE_TOL * max(1.0, np.abs(eigs).max()):
        raise SpectrumError(f"Eigenvalue sum {eigs.sum():.12g} differs from the trace {trace:.12g}.")
    bound = 2 + lam + BOUND_SLACK
    if eigs[0] > bound or eigs[-1] < -bound:
        LOGGER.warning(f"Sample seed={seed}: spectrum [{eigs[-1]:.6f}, {eigs[0]:.6f}] leaves ±{bound:g}.")
    if lab.verify_eigenpairs:
        _verify_eigenpairs(J, eigs)

    v.setflags(write=False)
    eigs.setflags(write=False)
    return SpectralSample(lam=float(lam), v=v, eigs=eigs, seed=int(seed), matrix=J if retain_matrix else None)


def eigenvalues_of(data) -> np.ndarray:
    """Returns the eigenvalue array of a SpectralSample or of a plain sequence."""
    eigs = data.eigs if isinstance(data, SpectralSample) else data
    return np.asarray(eigs, dtype=float)
