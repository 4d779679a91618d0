from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import DivergentIntegral, NonFinite
from ..logger import LOGGER
from .base import Measure
from .jacobi import JacobiMeasure


@dataclass(frozen=True)
class EdgeConstants:
    """Thresholds and edge constants of a base measure at a given λ.

    Infinite values mark divergent integrals; plus_finite and minus_finite
    carry the same information as flags. c_mu and c_mu_prime are None
    unless λ exceeds the matching threshold of a Jacobi measure.
    """

    lam: float
    lambda_plus: float
    lambda_minus: float
    tau_plus: float
    tau_minus: float
    c_mu: Optional[float]
    c_mu_prime: Optional[float]
    plus_finite: bool
    minus_finite: bool

    @property
    def above_plus(self) -> bool:
        """Returns whether λ > λ_+ with λ_+ finite."""
        return self.plus_finite and self.lam > self.lambda_plus

    @property
    def above_minus(self) -> bool:
        """Returns whether λ > λ_- with λ_- finite."""
        return self.minus_finite and self.lam > self.lambda_minus

    def to_dict(self) -> dict:
        return {
            key: (None if isinstance(value, float) and math.isinf(value) else value)
            for key, value in asdict(self).items()
        }


def _edge_integral(measure: Measure, power: int, side: int) -> Tuple[float, bool]:
    # ∫ dμ(x)/(1 - side·x)^power
    try:
        if isinstance(measure, JacobiMeasure):
            if side > 0:
                value = measure.integrate_weighted(np.ones_like, right=power)
            else:
                value = measure.integrate_weighted(np.ones_like, left=power)
        else:
            with np.errstate(divide="ignore"):
                value = measure.integrate(lambda x: 1.0 / (1.0 - side * x) ** power)
    except (DivergentIntegral, NonFinite) as error:
        LOGGER.warning(f"{measure!r}: {error}")
        return math.inf, False
    return float(value), True


def edge_constants(measure: Measure, lam: float) -> EdgeConstants:
    """λ_±, τ_± and the Weibull constants C_μ, C_μ' of a measure.

    Args:
        measure (Measure): the base measure.
        lam (float): the strength λ > 0 of the diagonal perturbation.

    Returns:
        EdgeConstants: the constants, with divergent integrals flagged.
    """
    if lam <= 0:
        raise ValueError(f"λ must be positive, got {lam}.")
    lambda_plus_sq, plus_finite = _edge_integral(measure, 2, +1)
    lambda_minus_sq, minus_finite = _edge_integral(measure, 2, -1)
    tau_plus, _ = _edge_integral(measure, 1, +1)
    tau_minus, _ = _edge_integral(measure, 1, -1)
    lambda_plus = math.sqrt(lambda_plus_sq)
    lambda_minus = math.sqrt(lambda_minus_sq)

    c_mu = None
    c_mu_prime = None
    if isinstance(measure, JacobiMeasure):
        if plus_finite and lam > lambda_plus:
            c_mu = (
                (lam / (lam**2 - lambda_plus_sq)) ** (measure.b + 1)
                * float(measure.d(1.0))
                * 2.0**measure.a
                / measure.Z
            )
        if minus_finite and lam > lambda_minus:
            c_mu_prime = (
                (lam / (lam**2 - lambda_minus_sq)) ** (measure.a + 1)
                * float(measure.d(-1.0))
                * 2.0**measure.b
                / measure.Z
            )
    return EdgeConstants(
        lam=float(lam),
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
        tau_plus=tau_plus,
        tau_minus=tau_minus,
        c_mu=c_mu,
        c_mu_prime=c_mu_prime,
        plus_finite=plus_finite,
        minus_finite=minus_finite,
    )
