"""Free convolution μ_sc ⊞ λμ of the semicircle law with a scaled base measure."""

from typing import Sequence

from .clt import clt_variance, rectangle_contour
from .free_convolution import DensityGrid, FreeConvolution, HighTempSolution
from .solver import SelfConsistentSolver


def solve_mfc(fc: FreeConvolution, z):
    """Returns m_fc(z), see FreeConvolution.solve_mfc."""
    return fc.solve_mfc(z)


def mfc_prime(fc: FreeConvolution, z):
    """Returns m_fc'(z), see FreeConvolution.mfc_prime."""
    return fc.mfc_prime(z)


def density(fc: FreeConvolution, xs, eta_schedule: Sequence[float] = None) -> DensityGrid:
    return fc.density(xs, eta_schedule)


def support_edges(fc: FreeConvolution):
    """Returns L_minus, L_plus and the method used for each edge."""
    return fc.L_minus, fc.L_plus, fc.edge_methods


def beta_c(fc: FreeConvolution) -> float:
    return fc.beta_c()


def gamma_hat(fc: FreeConvolution, beta: float) -> HighTempSolution:
    return fc.gamma_hat(beta)


def classical_locations(fc: FreeConvolution, N: int):
    return fc.classical_locations(N)


def limiting_free_energy(fc: FreeConvolution, beta: float) -> float:
    return fc.limiting_free_energy(beta)


__all__ = [
    "DensityGrid",
    "FreeConvolution",
    "HighTempSolution",
    "SelfConsistentSolver",
    "beta_c",
    "classical_locations",
    "clt_variance",
    "density",
    "gamma_hat",
    "limiting_free_energy",
    "mfc_prime",
    "rectangle_contour",
    "solve_mfc",
    "support_edges",
]
