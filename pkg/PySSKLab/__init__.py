from .core import lab
from .logger import LOGGER, log_to_file
from .errors import *
from .measure import DiscreteMeasure, JacobiMeasure, PointMass, edge_constants, make_jacobi, measure_from_dict
from .freeconv import FreeConvolution, clt_variance
from .spectra import SampleCache, SpectralSample, sample_matrix
from .saddle import contour_K, free_energy, saddle_data, saddle_gamma, steepest_curve, weibull_cdf, weibull_cdf_lower
from .experiments import ExperimentConfig, ExperimentReport, run_experiment
