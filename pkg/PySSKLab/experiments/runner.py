from __future__ import annotations

from typing import Callable, Dict, Optional

from ..core import lab
from ..logger import LOGGER
from ..methods import EXTREME_EIG, FREE_ENERGY_LIMIT, HIGH_TEMP, LAPLACE_ERROR, LOCAL_LAW, LOW_TEMP, LSS, RIGIDITY
from .config import ExperimentConfig
from .lss import run_lss
from .report import ExperimentReport
from .spectral import run_extreme_eig, run_local_law, run_rigidity
from .thermodynamics import run_free_energy_limit, run_high_temp, run_laplace_error, run_low_temp

RUNNERS: Dict[str, Callable[..., ExperimentReport]] = {
    LOW_TEMP: run_low_temp,
    HIGH_TEMP: run_high_temp,
    LSS: run_lss,
    RIGIDITY: run_rigidity,
    LOCAL_LAW: run_local_law,
    EXTREME_EIG: run_extreme_eig,
    LAPLACE_ERROR: run_laplace_error,
    FREE_ENERGY_LIMIT: run_free_energy_limit,
}


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> ExperimentReport:
    """Run the experiment named by cfg.experiment."""
    if cfg.experiment not in RUNNERS:
        raise ValueError(f"Unknown experiment {cfg.experiment!r}, expected one of {', '.join(RUNNERS)}.")
    LOGGER.info(
        f"Experiment {cfg.experiment}: N={cfg.N}, λ={cfg.lam:g}, trials={cfg.trials}, seed={cfg.master_seed}."
    )
    report = RUNNERS[cfg.experiment](cfg, threads=threads, cache_dir=lab.cache_dir)
    LOGGER.info(
        f"Experiment {cfg.experiment} ({report.label}) {'passed' if report.passed else 'failed'} in {report.runtime_seconds:.1f}s."
    )
    return report
