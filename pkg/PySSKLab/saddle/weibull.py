from __future__ import annotations

import numpy as np

from ..errors import DomainError


def _check_parameters(c: float, exponent: float) -> None:
    if c <= 0:
        raise DomainError(f"Weibull constant must be positive, got {c}.")
    if exponent <= -1:
        raise DomainError(f"Weibull exponent must exceed -1, got {exponent}.")


def _result(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def weibull_cdf(c: float, b: float, s):
    """exp(-c (-s)^(b+1)/(b+1)) for s <= 0, the limit law of the low temperature free energy.

    Raises:
        DomainError: c <= 0, b <= -1 or some s > 0.
    """
    _check_parameters(c, b)
    s = np.asarray(s, dtype=float)
    if np.any(s > 0):
        raise DomainError("weibull_cdf is defined for s <= 0.")
    return _result(np.exp(-c * (-s) ** (b + 1) / (b + 1)))


def weibull_cdf_lower(c: float, a: float, s):
    """1 - exp(-c s^(a+1)/(a+1)) for s >= 0.

    With (C_μ', a) this is the law of N^{1/(1+a)}(λ_N - L_-), with (C_μ, b)
    the law of N^{1/(1+b)}(L_+ - λ_1).

    Raises:
        DomainError: c <= 0, a <= -1 or some s < 0.
    """
    _check_parameters(c, a)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("weibull_cdf_lower is defined for s >= 0.")
    return _result(-np.expm1(-c * s ** (a + 1) / (a + 1)))
