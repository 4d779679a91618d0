from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from ..errors import BranchCut, OutOfDomain
from ..logger import LOGGER
from ..spectra import eigenvalues_of

DERIVATIVE_TOL = 1e-12
CURVE_TOL = 1e-12
BRACKET_STEPS = 200


def R_eval(sample, beta: float, z):
    """R(z) = 2βz - (1/N) Σ log(z - λ_i) on the principal branch.

    Args:
        sample: a SpectralSample or the eigenvalues themselves.
        beta (float): the inverse temperature.
        z: point or array off the cut (-∞, λ_1].

    Raises:
        BranchCut: some z lies on the real half line (-∞, λ_1].
    """
    eigs = eigenvalues_of(sample)
    z = np.asarray(z, dtype=complex)
    if np.any((z.imag == 0) & (z.real <= eigs.max())):
        raise BranchCut(f"R is evaluated on its cut (-∞, {eigs.max():.10g}].")
    flat = z.ravel()
    values = 2 * beta * flat - np.mean(np.log(flat[None, :] - eigs[:, None]), axis=0)
    values = values.reshape(z.shape)
    return complex(values) if values.ndim == 0 else values


def R_derivative(sample, beta: float, z, order: int = 1):
    """R^(l)(z), with R' = 2β - (1/N) Σ 1/(z - λ_i) and
    R^(l) = (1/N) Σ (-1)^l (l-1)!/(z - λ_i)^l for l >= 2."""
    if order < 1:
        raise ValueError(f"Derivative order must be positive, got {order}.")
    eigs = eigenvalues_of(sample)
    z = np.asarray(z)
    flat = z.ravel()
    terms = (-1.0) ** order * math.factorial(order - 1) / (flat[None, :] - eigs[:, None]) ** order
    values = np.mean(terms, axis=0)
    if order == 1:
        values = values + 2 * beta
    values = values.reshape(z.shape)
    if values.ndim == 0:
        return complex(values) if np.iscomplexobj(values) else float(values)
    return values


def saddle_gamma(sample, beta: float) -> float:
    """The unique γ > λ_1 with (1/N) Σ 1/(γ - λ_i) = 2β.

    R' increases from -∞ on (λ_1, ∞), so the root is bracketed by
    [λ_1 + 1/(3βN), λ_1 + max(1, 1/β)], found by Brent's method and polished
    with Newton steps.
    """
    if beta <= 0:
        raise ValueError(f"β must be positive, got {beta}.")
    eigs = eigenvalues_of(sample)
    N = eigs.size
    top = float(eigs.max())

    def derivative(x: float) -> float:
        return 2 * beta - float(np.mean(1.0 / (x - eigs)))

    low = top + 1.0 / (3 * beta * N)
    high = top + max(1.0, 1.0 / beta)
    while derivative(high) <= 0:
        high = top + 2 * (high - top)
    gamma = brentq(derivative, low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    for _ in range(3):
        value = derivative(gamma)
        if abs(value) < DERIVATIVE_TOL:
            break
        step = value / float(np.mean(1.0 / (gamma - eigs) ** 2))
        if gamma - step <= top:
            break
        gamma -= step
    LOGGER.debug(f"Saddle β={beta:g}, N={N}: γ={gamma:.15g}, R'(γ)={derivative(gamma):.3e}.")
    return float(gamma)


def _imag_R(eigs: np.ndarray, beta: float, x: float, y: float) -> float:
    return 2 * beta * y - float(np.mean(np.arctan2(y, x - eigs)))


def steepest_curve(sample, beta: float, y: float, gamma: float = None) -> float:
    """h(y): the unique x with Im R(x + iy) = 0, the steepest descent path through γ.

    x -> Im R(x + iy) increases for y > 0, runs from 2βy - π to 2βy and is
    positive at γ, so the root lies left of γ. h is even in y.

    Raises:
        OutOfDomain: |y| >= π/(2β).
    """
    y = abs(float(y))
    if y >= math.pi / (2 * beta):
        raise OutOfDomain(f"|y|={y:g} is not below π/(2β)={math.pi / (2 * beta):g}.")
    eigs = eigenvalues_of(sample)
    if gamma is None:
        gamma = saddle_gamma(eigs, beta)
    if y == 0:
        return float(gamma)

    high = gamma
    width = max(y, 1.0)
    low = gamma - width
    for _ in range(BRACKET_STEPS):
        if _imag_R(eigs, beta, low, y) < 0:
            break
        width *= 2
        low = gamma - width
    else:
        raise OutOfDomain(f"No sign change of Im R left of γ at y={y:g}.")
    x = brentq(lambda t: _imag_R(eigs, beta, t, y), low, high, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = _imag_R(eigs, beta, x, y)
    if abs(residual) > CURVE_TOL:
        slope = y * float(np.mean(1.0 / ((x - eigs) ** 2 + y**2)))
        x -= residual / slope
    return float(x)
