from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, List, Optional

import numpy as np
from numpy.random import SeedSequence

from ..core import lab
from ..errors import RegimeViolation
from ..freeconv import FreeConvolution
from ..logger import LOGGER
from ..measure import Measure, measure_from_dict
from ..spectra import SampleCache, SpectralSample, sample_matrix
from .config import ExperimentConfig, validate


def trial_seed(master_seed: int, index: int) -> int:
    """Seed of trial index, derived from (master_seed, index) only."""
    return int(SeedSequence([int(master_seed), int(index)]).generate_state(1, np.uint64)[0])


def draw(
    measure: Measure,
    lam: float,
    N: int,
    master_seed: int,
    index: int,
    retain_matrix: bool = False,
    cache_dir: Optional[str] = None,
) -> SpectralSample:
    """Sample of trial index, read from the cache when one is configured."""
    seed = trial_seed(master_seed, index)
    if cache_dir is not None and not retain_matrix:
        return SampleCache(cache_dir).sample(measure, lam, N, seed)
    return sample_matrix(measure, lam, N, seed, retain_matrix)


def run_trials(trial: Callable[[Any, int], Any], context: Any, trials: int, threads: Optional[int] = None) -> List[Any]:
    """Run trial(context, index) for every index and return results in index order.

    Trials run in a process pool unless a single worker is requested;
    context must be picklable in that case.
    """
    threads = threads or lab.threads
    task = partial(trial, context)
    LOGGER.info(f"Running {trials} trials on {min(threads, trials)} worker(s).")
    if threads == 1 or trials == 1:
        return list(map(task, range(trials)))
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(task, range(trials), chunksize=max(1, trials // (4 * threads))))


def prepare(cfg: ExperimentConfig, needs_fc: bool = True):
    """Build the measure and free convolution of a config and check its regime.

    Raises:
        RegimeViolation: some precondition of the experiment fails.
    """
    violations = validate(cfg)
    if violations:
        LOGGER.error(f"Experiment {cfg.experiment}: {'; '.join(violations)}")
        raise RegimeViolation(violations)
    measure = measure_from_dict(cfg.measure)
    fc = FreeConvolution(measure, cfg.lam) if needs_fc else None
    if fc is not None:
        violations = validate(cfg, fc)
        if violations:
            LOGGER.error(f"Experiment {cfg.experiment}: {'; '.join(violations)}")
            raise RegimeViolation(violations)
    return measure, fc
