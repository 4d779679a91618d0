from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial

from ..freeconv import clt_variance
from ..measure import Measure
from .config import ExperimentConfig
from .pool import draw, prepare, run_trials
from .report import ExperimentReport
from .statistics import moments

DEGENERATE_VARIANCE = 1e-9


@dataclass(frozen=True)
class LinearStatisticTrial:
    measure: Measure
    lam: float
    N: int
    master_seed: int
    coefficients: tuple
    center: float
    cache_dir: Optional[str] = None


def linear_statistic_trial(context: LinearStatisticTrial, index: int) -> dict:
    """(1/√N)(Σ f(λ_i) - N ∫ f dμ_fc) of one sampled spectrum."""
    sample = draw(context.measure, context.lam, context.N, context.master_seed, index, cache_dir=context.cache_dir)
    f = Polynomial(context.coefficients)
    total = float(np.sum(f(sample.eigs)))
    return {
        "trial": index,
        "seed": sample.seed,
        "sum_f": total,
        "statistic": (total - context.N * context.center) / math.sqrt(context.N),
    }


def run_lss(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Gaussian fluctuations of the linear statistic of a polynomial f.

    f_spec lists the coefficients of f in increasing degree. The empirical
    variance is compared with the contour variance; the mean is reported
    only, since the centering N ∫ f dμ_fc is exact only in the limit.

    Raises:
        RegimeViolation: the config is outside a > 1, b > 37/3, λ > max(λ_±), or has no f_spec.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    f = Polynomial(cfg.f_spec)
    center = fc.expectation(f)
    theory = clt_variance(fc, f)

    context = LinearStatisticTrial(
        measure=measure,
        lam=cfg.lam,
        N=cfg.N,
        master_seed=cfg.master_seed,
        coefficients=tuple(float(c) for c in cfg.f_spec),
        center=center,
        cache_dir=cache_dir,
    )
    table = pd.DataFrame(run_trials(linear_statistic_trial, context, cfg.trials, threads))

    report = ExperimentReport(cfg, table)
    stats = moments(table["statistic"])
    if theory < DEGENERATE_VARIANCE:
        report.check("empirical_variance", stats["empirical_variance"], "variance_ratio", DEGENERATE_VARIANCE)
    else:
        ratio = abs(stats["empirical_variance"] / theory - 1)
        report.check("variance_ratio", ratio, "variance_ratio", cfg.tolerance("variance_ratio"))
    report.check(
        "mean",
        abs(stats["empirical_mean"]),
        "mean_sigmas",
        cfg.tolerance("mean_sigmas") * max(stats["standard_error"], math.sqrt(theory / cfg.trials)),
        asserted=False,
    )
    report.summary.update(
        {
            "f_spec": list(cfg.f_spec),
            "center": center,
            "theory_variance": theory,
        }
    )
    report.summary.update(stats)
    report.runtime_seconds = time.perf_counter() - start
    return report
