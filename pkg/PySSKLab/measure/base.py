from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

import numpy as np


class Measure(ABC):
    """The base class for every probability measure V can be drawn from.

    A measure knows how to integrate against itself, how to evaluate its
    Stieltjes transform off its support, how to draw samples and how to
    describe itself as a JSON-serializable dictionary.
    """

    @property
    def a(self) -> Optional[float]:
        """Returns the exponent at -1, None for measures without a Jacobi edge."""
        return None

    @property
    def b(self) -> Optional[float]:
        """Returns the exponent at +1, None for measures without a Jacobi edge."""
        return None

    @property
    def support(self) -> Tuple[float, float]:
        """Returns the smallest closed interval containing the support."""
        return -1.0, 1.0

    @abstractmethod
    def rule(self, order: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and normalized weights representing the measure."""

    @abstractmethod
    def integrate(self, f: Callable):
        """Integrate f against the measure."""

    @abstractmethod
    def stieltjes(self, s, power: int = 1, order: Optional[int] = None) -> np.ndarray:
        """Evaluate ∫ dμ(t)/(t-s)^power for every point of s."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the measure with the caller's random stream."""

    @abstractmethod
    def reflected(self) -> "Measure":
        """The image of the measure under x -> -x."""

    @abstractmethod
    def to_dict(self) -> dict:
        """The JSON-serializable spec of the measure."""

    def moment(self, k: int) -> float:
        """Returns ∫ x^k dμ(x)."""
        return float(np.real(self.integrate(lambda x: x**k)))

    def spec_hash(self) -> str:
        """Returns the sha256 digest of the canonical JSON spec."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
