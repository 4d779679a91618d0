from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from ..freeconv import FreeConvolution
from ..measure import Measure
from ..saddle import weibull_cdf_lower
from ..spectra import (
    local_law_residual,
    resolvent,
    rigidity_report,
    symmetry_residual,
    trace_law_residual,
    ward_residual,
)
from .config import ExperimentConfig
from .pool import draw, prepare, run_trials
from .report import ExperimentReport
from .statistics import ks_distance

LOCAL_LAW_GRID: Tuple[complex, ...] = tuple(
    complex(x, y) for x, y in itertools.product((-1.0, 0.0, 1.0, 2.0), (0.5, 1.0, 2.0))
)
BULK_CONCENTRATION = 0.1


@dataclass(frozen=True)
class RigidityTrial:
    fc: FreeConvolution
    N: int
    master_seed: int
    zeta: float
    kappa: float
    gammas: np.ndarray
    cache_dir: Optional[str] = None


def rigidity_trial(context: RigidityTrial, index: int) -> dict:
    fc = context.fc
    sample = draw(fc.measure, fc.lam, context.N, context.master_seed, index, cache_dir=context.cache_dir)
    report = rigidity_report(sample, fc, context.zeta, context.kappa, gammas=context.gammas)
    return {
        "trial": index,
        "seed": sample.seed,
        "max_bulk_dev": report.max_bulk_dev,
        "upper_bound": report.upper_bound,
        "max_lower_dev": report.max_lower_dev,
        "lower_bound": report.lower_bound,
        "mid_dev": report.mid_dev,
        "passed": report.passed,
    }


def run_rigidity(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Eigenvalue rigidity in the two bulk windows, as a pass rate over trials.

    Raises:
        RegimeViolation: a <= 1 or b <= 3.
    """
    start = time.perf_counter()
    _, fc = prepare(cfg)
    gammas, _ = fc.classical_locations(cfg.N)
    context = RigidityTrial(
        fc=fc, N=cfg.N, master_seed=cfg.master_seed, zeta=cfg.zeta, kappa=cfg.kappa, gammas=gammas, cache_dir=cache_dir
    )
    table = pd.DataFrame(run_trials(rigidity_trial, context, cfg.trials, threads))

    report = ExperimentReport(cfg, table)
    pass_rate = float(table["passed"].mean())
    report.check("rigidity_pass_rate", pass_rate, "rigidity_pass_rate", cfg.tolerance("rigidity_pass_rate"), below=False)
    concentration = float((table["mid_dev"] < BULK_CONCENTRATION).mean())
    report.summary.update(
        {
            "pass_rate": pass_rate,
            "mid_concentration_rate": concentration,
            "upper_bound": float(table["upper_bound"].iloc[0]),
            "lower_bound": float(table["lower_bound"].iloc[0]),
            "median_max_bulk_dev": float(table["max_bulk_dev"].median()),
            "edge_exponents": list(fc.edge_exponents),
        }
    )
    report.runtime_seconds = time.perf_counter() - start
    return report


@dataclass(frozen=True)
class LocalLawTrial:
    measure: Measure
    lam: float
    N: int
    master_seed: int
    epsilon: float


def local_law_trial(context: LocalLawTrial, index: int) -> List[dict]:
    """Resolvent diagnostics of one retained-matrix sample at every grid point."""
    sample = draw(context.measure, context.lam, context.N, context.master_seed, index, retain_matrix=True)
    rows = []
    for z in LOCAL_LAW_GRID:
        G = resolvent(sample, z)
        residual = local_law_residual(sample, z, G)
        envelope = context.N ** (context.epsilon - 0.5) * abs(z.imag) ** -3
        rows.append(
            {
                "trial": index,
                "seed": sample.seed,
                "z_re": z.real,
                "z_im": z.imag,
                "residual": residual,
                "envelope": envelope,
                "below": residual <= envelope,
                "ward": ward_residual(G, z),
                "symmetry": symmetry_residual(G),
                "trace_law": float(trace_law_residual(sample, z)),
            }
        )
    return rows


def run_local_law(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Entrywise local law and Ward identity on the twelve-point z grid.

    Matrices are always retained, so the sample cache is not used.

    Raises:
        RegimeViolation: N > 2000 or the grid leaves the domain |Im z| > N^(-1/4).
    """
    start = time.perf_counter()
    measure, _ = prepare(cfg, needs_fc=False)
    context = LocalLawTrial(
        measure=measure, lam=cfg.lam, N=cfg.N, master_seed=cfg.master_seed, epsilon=cfg.tolerance("local_law_epsilon")
    )
    rows = run_trials(local_law_trial, context, cfg.trials, threads)
    table = pd.DataFrame(list(itertools.chain.from_iterable(rows)))

    report = ExperimentReport(cfg, table)
    per_trial = table.groupby("trial")["below"].all()
    pass_rate = float(per_trial.mean())
    max_ward = float(table["ward"].max())
    report.check("local_law_pass_rate", pass_rate, "local_law_pass_rate", cfg.tolerance("local_law_pass_rate"), below=False)
    report.check("ward_residual", max_ward, "ward_residual", cfg.tolerance("ward_residual"))
    report.summary.update(
        {
            "pass_rate": pass_rate,
            "max_ward_residual": max_ward,
            "max_symmetry_residual": float(table["symmetry"].max()),
            "max_trace_law_residual": float(table["trace_law"].max()),
            "max_residual_to_envelope": float((table["residual"] / table["envelope"]).max()),
        }
    )
    report.runtime_seconds = time.perf_counter() - start
    return report


@dataclass(frozen=True)
class ExtremeTrial:
    measure: Measure
    lam: float
    N: int
    master_seed: int
    cache_dir: Optional[str] = None


def extreme_trial(context: ExtremeTrial, index: int) -> dict:
    sample = draw(context.measure, context.lam, context.N, context.master_seed, index, cache_dir=context.cache_dir)
    return {"trial": index, "seed": sample.seed, "lambda_1": sample.lambda_1, "lambda_N": sample.lambda_N}


def run_extreme_eig(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Weibull fluctuations of the extreme eigenvalues.

    N^{1/(1+a)}(λ_N - L_-) is compared with 1 - exp(-C_μ' s^{1+a}/(1+a));
    when b > 1 and λ > λ_+ the mirror statistic N^{1/(1+b)}(L_+ - λ_1) is
    compared with the C_μ law as well.

    Raises:
        RegimeViolation: a <= 1 or λ <= λ_-.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    a, b, N = measure.a, measure.b, cfg.N
    context = ExtremeTrial(measure=measure, lam=cfg.lam, N=N, master_seed=cfg.master_seed, cache_dir=cache_dir)
    table = pd.DataFrame(run_trials(extreme_trial, context, cfg.trials, threads))
    table["lower_stat"] = N ** (1.0 / (1 + a)) * (table["lambda_N"] - fc.L_minus)

    report = ExperimentReport(cfg, table)
    c_prime = fc.edges.c_mu_prime
    ks_lower = ks_distance(table["lower_stat"], lambda s: weibull_cdf_lower(c_prime, a, np.maximum(s, 0.0)))
    report.check("ks_lower_edge", ks_lower, "ks_lower_edge", cfg.tolerance("ks_lower_edge"))
    report.summary.update({"L_minus": fc.L_minus, "c_mu_prime": c_prime, "ks_distance": ks_lower})

    if b > 1 and fc.edges.above_plus:
        c_mu = fc.edges.c_mu
        table["upper_stat"] = N ** (1.0 / (1 + b)) * (fc.L_plus - table["lambda_1"])
        ks_upper = ks_distance(table["upper_stat"], lambda s: weibull_cdf_lower(c_mu, b, np.maximum(s, 0.0)))
        report.check("ks_lambda1", ks_upper, "ks_lambda1", cfg.tolerance("ks_lambda1"))
        report.summary.update({"L_plus": fc.L_plus, "c_mu": c_mu, "ks_lambda1": ks_upper})
    report.runtime_seconds = time.perf_counter() - start
    return report
