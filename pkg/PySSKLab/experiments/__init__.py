from .config import DEFAULT_TOLERANCES, TOLERANCE_VERSION, ExperimentConfig, validate
from .report import ExperimentReport
from .statistics import ks_distance, moments
from .pool import draw, run_trials, trial_seed
from .thermodynamics import run_free_energy_limit, run_high_temp, run_laplace_error, run_low_temp
from .lss import run_lss
from .spectral import LOCAL_LAW_GRID, run_extreme_eig, run_local_law, run_rigidity
from .runner import RUNNERS, run_experiment
