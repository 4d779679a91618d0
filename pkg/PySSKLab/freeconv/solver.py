from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from ..core import lab
from ..measure import Measure

NEWTON_SWITCH = 1e-4
# a damped step that keeps more than this fraction of the residual has stalled
STALL_RATIO = 0.5
# Newton is only tried off the residual gate while |1 - g2| stays above this
NEWTON_GUARD = 1e-3
ALPHA_FLOOR = 1e-12
LADDER_TOP = 2.0
LADDER_RATIO = 4.0
# real targets are approached from this height before the final real-axis solve
REAL_AXIS_ETA = 1e-10


class SelfConsistentSolver:
    """Vectorized solver of m = ∫ dμ(t)/(λt - z - m).

    Every point runs a damped fixed point iteration m <- m - α(m - g1)
    whose α halves whenever the residual grows, switching to Newton steps
    m <- m - (m - g1)/(1 - g2) once the residual is below 1e-4, or earlier
    when the damped step stalls while 1 - g2 is well away from zero. Near
    the bulk |g2| approaches 1 and the plain map barely contracts, so the
    stall switch is what reaches small Im z there. Steps that leave the
    half plane of z are rejected. solve() reaches small Im z by a
    geometric ladder of warm-started solves, and real z outside the support
    by a last real-arithmetic Newton solve from just above the axis.
    """

    def __init__(
        self,
        measure: Measure,
        lam: float,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        order: Optional[int] = None,
    ) -> None:
        if lam <= 0:
            raise ValueError(f"λ must be positive, got {lam}.")
        self._measure = measure
        self._lam = float(lam)
        self._tol = float(tol or lab.solver_tol)
        self._max_iter = int(max_iter or lab.max_iter)
        self._order = int(order or lab.solver_order)

    @property
    def measure(self) -> Measure:
        return self._measure

    @property
    def lam(self) -> float:
        return self._lam

    @property
    def tol(self) -> float:
        return self._tol

    @property
    def max_iter(self) -> int:
        return self._max_iter

    def moments(self, omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Returns ∫ dμ/(λt - ω) and ∫ dμ/(λt - ω)² at every ω."""
        s = np.asarray(omega, dtype=complex) / self._lam
        g1 = self._measure.stieltjes(s, 1, self._order) / self._lam
        g2 = self._measure.stieltjes(s, 2, self._order) / self._lam**2
        return g1, g2

    def iterate(
        self, z: np.ndarray, m: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Run the damped iteration from the start values m.

        Returns:
            Tuple: m, g2 at the solution, residual |m - g1| and the converged mask.
        """
        z = np.asarray(z, dtype=complex).ravel()
        m = np.array(m, dtype=complex).ravel()
        alpha = np.ones(z.size)
        skip_newton = np.zeros(z.size, dtype=bool)
        stalled = np.zeros(z.size, dtype=bool)
        low, high = self._measure.support
        s = (z.real + m.real) / self._lam
        valid = (z.imag != 0) | (s < low) | (s > high)
        g1 = np.full(z.size, np.nan, dtype=complex)
        g2 = np.full(z.size, np.nan, dtype=complex)
        if valid.any():
            g1[valid], g2[valid] = self.moments(z[valid] + m[valid])
        residual = np.abs(m - g1)
        residual[~np.isfinite(residual)] = np.inf
        active = residual > self._tol

        for _ in range(self._max_iter):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            zi = z[idx]
            step = m[idx] - g1[idx]
            denominator = 1.0 - g2[idx]
            newton = (
                (residual[idx] < NEWTON_SWITCH) | (stalled[idx] & (np.abs(denominator) > NEWTON_GUARD))
            ) & ~skip_newton[idx]
            with np.errstate(all="ignore"):
                newton_step = m[idx] - step / denominator
            newton &= np.isfinite(newton_step)
            candidate = np.where(newton, newton_step, m[idx] - alpha[idx] * step)

            valid = np.isfinite(candidate)
            off_axis = zi.imag != 0
            valid &= ~off_axis | (candidate.imag * np.sign(zi.imag) > 0)
            s = (zi.real + candidate.real) / self._lam
            valid &= off_axis | (s < low) | (s > high)

            candidate_g1 = np.full(idx.size, np.nan, dtype=complex)
            candidate_g2 = np.full(idx.size, np.nan, dtype=complex)
            if valid.any():
                candidate_g1[valid], candidate_g2[valid] = self.moments(zi[valid] + candidate[valid])
            candidate_residual = np.abs(candidate - candidate_g1)
            accept = (
                valid
                & np.isfinite(candidate_residual)
                & ((candidate_residual < residual[idx]) | (candidate_residual <= self._tol))
            )

            taken = idx[accept]
            with np.errstate(all="ignore"):
                progress = candidate_residual <= STALL_RATIO * residual[idx]
            stalled[idx] = ~accept | ~progress
            m[taken] = candidate[accept]
            g1[taken] = candidate_g1[accept]
            g2[taken] = candidate_g2[accept]
            residual[taken] = candidate_residual[accept]

            grown = idx[accept & ~newton]
            alpha[grown] = np.minimum(1.0, 1.5 * alpha[grown])
            alpha[idx[~accept & ~newton]] *= 0.5
            skip_newton[idx] = ~accept & newton
            active = (residual > self._tol) & (alpha > ALPHA_FLOOR)

        return m, g2, residual, residual <= self._tol

    def solve(
        self, z
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Solve at arbitrary z off the support by continuation in Im z.

        Points below the real axis are solved at the conjugate point and
        conjugated back.

        Returns:
            Tuple: m, g2, residual and converged mask, each shaped like z.
        """
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        flat = z.ravel()
        lower = flat.imag < 0
        upper = np.where(lower, flat.conj(), flat)
        x, y = upper.real, upper.imag
        on_axis = y == 0
        target = np.where(on_axis, REAL_AXIS_ETA, y)

        level = LADDER_TOP
        heights = np.maximum(target, level)
        m, g2, residual, converged = self.iterate(x + 1j * heights, -1.0 / (x + 1j * heights))
        while np.any(target < level):
            descending = target < level
            level /= LADDER_RATIO
            heights = np.maximum(target[descending], level)
            (
                m[descending],
                g2[descending],
                residual[descending],
                converged[descending],
            ) = self.iterate(x[descending] + 1j * heights, m[descending])

        if on_axis.any():
            (
                m[on_axis],
                g2[on_axis],
                residual[on_axis],
                converged[on_axis],
            ) = self.iterate(x[on_axis] + 0j, m[on_axis].real + 0j)

        m = np.where(lower, m.conj(), m)
        g2 = np.where(lower, g2.conj(), g2)
        return m.reshape(shape), g2.reshape(shape), residual.reshape(shape), converged.reshape(shape)
