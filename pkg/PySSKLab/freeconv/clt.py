from __future__ import annotations

import math
from typing import Callable, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..core import lab
from ..errors import ContourTooClose
from ..logger import LOGGER

MIN_CLEARANCE = 1e-3
IMAGINARY_TOL = 1e-6
NEGATIVE_TOL = 1e-8
OUTER_CHUNK = 256


def _clearances(L_minus: float, L_plus: float, singularities: Sequence[float], margin: float) -> Tuple[float, float]:
    left = right = margin
    for s in singularities:
        s = float(np.real(s))
        if L_minus <= s <= L_plus:
            raise ContourTooClose(f"Singularity {s:.10g} lies inside the support [{L_minus:.6f}, {L_plus:.6f}].")
        if s > L_plus:
            right = min(right, 0.5 * (s - L_plus))
        else:
            left = min(left, 0.5 * (L_minus - s))
    if min(left, right) < MIN_CLEARANCE:
        raise ContourTooClose(
            f"Contour clearance {min(left, right):.3e} is below {MIN_CLEARANCE:g}, a singularity is too close to the support."
        )
    return left, right


def rectangle_contour(
    L_minus: float, L_plus: float, left: float, right: float, height: float, nodes_per_side: int, panel_order: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes ξ_k and weights w_k with Σ w_k g(ξ_k) ≈ ∮ g(ξ) dξ.

    The rectangle has vertices L_- - left ± i·height and L_+ + right ± i·height
    and is run counterclockwise; each side is split into equal panels
    carrying a Gauss-Legendre rule of the given order.
    """
    panels = max(1, nodes_per_side // panel_order)
    x, w = leggauss(panel_order)
    corners = np.array(
        [
            L_minus - left - 1j * height,
            L_plus + right - 1j * height,
            L_plus + right + 1j * height,
            L_minus - left + 1j * height,
        ]
    )
    nodes, weights = [], []
    for start, end in zip(corners, np.roll(corners, -1)):
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * np.diff(edges)
        middle = 0.5 * (edges[1:] + edges[:-1])
        u = (middle[:, None] + half[:, None] * x[None, :]).ravel()
        nodes.append(start + (end - start) * u)
        weights.append((end - start) * (half[:, None] * w[None, :]).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def clt_variance(
    fc,
    f: Callable,
    singularities: Sequence[float] = (),
    margin: float = 0.25,
    nodes_per_side: int = 2000,
    panel_order: int = 20,
) -> float:
    """Limiting variance of the linear statistic Σ f(λ_i) - N ∫ f dμ_fc.

    With m = m_fc and the contour Γ around [L_-, L_+] the variance is

        (1/4π²) (∮ f (1 + m') m dξ)² - (1/4π²) ∫ (∮ f (1 + m') / (λt - ξ - m) dξ)² dμ(t).

    Args:
        fc (FreeConvolution): the free convolution handle.
        f (Callable): vectorized function analytic on a neighborhood of Γ.
        singularities (Sequence[float], optional): real singular points of f; Γ stays halfway between them and the support.
        margin (float, optional): distance from Γ to the support. Defaults to 0.25.
        nodes_per_side (int, optional): quadrature nodes on each side of Γ. Defaults to 2000.
        panel_order (int, optional): Gauss-Legendre order of each panel. Defaults to 20.

    Raises:
        ContourTooClose: a singularity sits inside the support or closer than 1e-3 to it.
    """
    left, right = _clearances(fc.L_minus, fc.L_plus, singularities, margin)
    xi, dxi = rectangle_contour(fc.L_minus, fc.L_plus, left, right, margin, nodes_per_side, panel_order)
    m, prime = fc.solve_with_prime(xi)
    kernel = np.asarray(f(xi), dtype=complex) * (1.0 + prime) * dxi
    first = np.sum(kernel * m)

    t, weights = fc.measure.rule(lab.quadrature_order)
    second = 0.0 + 0.0j
    for start in range(0, t.size, OUTER_CHUNK):
        chunk = t[start : start + OUTER_CHUNK]
        inner = (kernel[None, :] / (fc.lam * chunk[:, None] - xi[None, :] - m[None, :])).sum(axis=1)
        second += np.dot(weights[start : start + OUTER_CHUNK], inner**2)

    value = (first**2 - second) / (4 * math.pi**2)
    if abs(value.imag) > IMAGINARY_TOL:
        LOGGER.warning(f"CLT variance has imaginary residue {value.imag:.3e}.")
    variance = float(value.real)
    if variance < 0:
        if variance < -NEGATIVE_TOL:
            LOGGER.warning(f"CLT variance {variance:.3e} is negative beyond {NEGATIVE_TOL:g}, clamped to zero.")
        variance = 0.0
    LOGGER.debug(f"CLT variance {variance:.10g} on {xi.size} contour nodes, clearance ({left:g}, {right:g}).")
    return variance
