from .sample import SpectralSample, eigenvalues_of, goe, sample_matrix
from .diagnostics import (
    RigidityReport,
    eigenvalue_frame,
    empirical_stieltjes,
    hat_mfc,
    local_law_residual,
    resolvent,
    rigidity_report,
    symmetry_residual,
    trace_law_residual,
    ward_residual,
)
from .cache import SampleCache
