from __future__ import annotations

import math
from typing import Tuple

import numpy as np

from ..errors import EdgeNotFound
from ..logger import LOGGER
from ..measure import EdgeConstants, Measure
from ..methods import BISECTION, CLOSED_FORM
from .solver import SelfConsistentSolver

EDGE_ETA = 1e-13
EDGE_DENSITY = 1e-8
EDGE_XTOL = 1e-10
IDENTITY_STEP = 1e-7
IDENTITY_TOL = 1e-4


def _density_near_axis(solver: SelfConsistentSolver, x: float) -> float:
    """Returns Im m_fc(x + iη)/π, or inf when the solver does not settle at x.

    The solver only fails to settle where the density is positive or at the
    edge itself, so the edge search counts such points as inside the support.
    """
    m, _, residual, converged = solver.solve(np.array([x + 1j * EDGE_ETA]))
    if not converged[0]:
        LOGGER.debug(f"Edge search point x={x:.12g} did not settle (residual {residual[0]:.3e}), taken as inside.")
        return math.inf
    return float(m[0].imag) / math.pi


def _bisect_edge(solver: SelfConsistentSolver, side: int) -> float:
    inner = 0.0
    outer = side * (3.0 + solver.lam)
    if _density_near_axis(solver, inner) <= EDGE_DENSITY:
        raise EdgeNotFound("Density at the origin is below threshold, no bracket for the edge search.")
    if _density_near_axis(solver, outer) > EDGE_DENSITY:
        raise EdgeNotFound(f"Density at x={outer:g} is above threshold, no bracket for the edge search.")
    while abs(outer - inner) > EDGE_XTOL:
        middle = 0.5 * (inner + outer)
        if _density_near_axis(solver, middle) > EDGE_DENSITY:
            inner = middle
        else:
            outer = middle
    return 0.5 * (inner + outer)


def _check_edge_identity(solver: SelfConsistentSolver, edge: float, side: int) -> None:
    # L + m_fc(L) = ±λ at a closed form edge
    m, _, _, converged = solver.solve(np.array([edge + side * IDENTITY_STEP + 0j]))
    residual = abs(edge + m[0].real - side * solver.lam)
    if not converged[0] or residual > IDENTITY_TOL:
        LOGGER.warning(
            f"Edge identity L + m_fc(L) = {side * solver.lam:g} violated at L={edge:.10f}: residual {residual:.3e}."
        )
    else:
        LOGGER.debug(f"Edge identity at L={edge:.10f}: residual {residual:.3e}.")


def support_edges(
    measure: Measure, lam: float, edges: EdgeConstants, solver: SelfConsistentSolver
) -> Tuple[float, float, Tuple[str, str]]:
    """Endpoints L_- < 0 < L_+ of the support of μ_sc ⊞ λμ.

    When b > 1 and λ > λ_+ the upper edge is λ + τ_+/λ; otherwise it is
    located by bisection on the density of the self-consistent solution
    just above the real axis. The lower edge mirrors this with a, λ_- and τ_-.

    Returns:
        Tuple: L_minus, L_plus and the method used for each edge.
    """
    if measure.b is not None and measure.b > 1 and edges.above_plus:
        L_plus = lam + edges.tau_plus / lam
        _check_edge_identity(solver, L_plus, +1)
        upper_method = CLOSED_FORM
    else:
        L_plus = _bisect_edge(solver, +1)
        upper_method = BISECTION
    if measure.a is not None and measure.a > 1 and edges.above_minus:
        L_minus = -(lam + edges.tau_minus / lam)
        _check_edge_identity(solver, L_minus, -1)
        lower_method = CLOSED_FORM
    else:
        L_minus = _bisect_edge(solver, -1)
        lower_method = BISECTION
    return L_minus, L_plus, (lower_method, upper_method)
