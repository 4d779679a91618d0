from __future__ import annotations

from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .base import Measure
from .jacobi import _weighted_sum


class DiscreteMeasure(Measure):
    """A finitely supported measure Σ w_k δ_{x_k} on [-1, 1].

    It covers the point mass δ₀, which reduces the free convolution to the
    semicircle law, and the empirical measure (1/N)Σ δ_{v_i} of a sampled
    diagonal. Integrals and Stieltjes transforms are exact finite sums.
    """

    def __init__(self, atoms: Sequence[float], weights: Optional[Sequence[float]] = None) -> None:
        atoms = np.atleast_1d(np.asarray(atoms, dtype=float))
        if atoms.ndim != 1 or atoms.size == 0:
            raise ValueError("A discrete measure needs at least one atom.")
        if np.any(np.abs(atoms) > 1):
            raise ValueError("Atoms must lie in [-1, 1].")
        if weights is None:
            weights = np.full(atoms.size, 1.0 / atoms.size)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != atoms.shape:
            raise ValueError("Atoms and weights must have the same length.")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("Weights must be nonnegative with a positive total.")
        self._atoms = atoms
        self._weights = weights / weights.sum()
        self._atoms.setflags(write=False)
        self._weights.setflags(write=False)

    @property
    def atoms(self) -> np.ndarray:
        """Returns the atom locations."""
        return self._atoms

    @property
    def support(self) -> Tuple[float, float]:
        return float(self._atoms.min()), float(self._atoms.max())

    @property
    def weights(self) -> np.ndarray:
        """Returns the normalized atom masses."""
        return self._weights

    def rule(self, order: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        return self._atoms, self._weights

    def integrate(self, f: Callable, order: Optional[int] = None):
        return _weighted_sum(self._atoms, self._weights, f)

    def stieltjes(self, s, power: int = 1, order: Optional[int] = None) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, 2048):
            part = flat[start : start + 2048]
            out[start : start + 2048] = (
                1.0 / (self._atoms[None, :] - part[:, None]) ** power
            ) @ self._weights
        return out.reshape(s.shape)

    def sample(self, rng: np.random.Generator, size=None):
        if self._atoms.size == 1:
            return float(self._atoms[0]) if size is None else np.full(size, self._atoms[0])
        draws = rng.choice(self._atoms, size=size, p=self._weights)
        return float(draws) if size is None else draws

    def reflected(self) -> DiscreteMeasure:
        return DiscreteMeasure(-self._atoms[::-1], self._weights[::-1])

    def to_dict(self) -> dict:
        return {"atoms": self._atoms.tolist(), "weights": self._weights.tolist()}

    def __repr__(self) -> str:
        return f"DiscreteMeasure(atoms={self._atoms.size})"


class PointMass(DiscreteMeasure):
    """The point mass δ_x, δ₀ by default."""

    def __init__(self, location: float = 0.0) -> None:
        super().__init__([location], [1.0])

    def to_dict(self) -> dict:
        return {"point_mass": float(self._atoms[0])}

    def __repr__(self) -> str:
        return f"PointMass({self._atoms[0]:g})"
