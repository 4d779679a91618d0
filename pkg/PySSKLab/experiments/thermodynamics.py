from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy.stats import norm

from ..logger import LOGGER
from ..measure import Measure
from ..saddle import saddle_data, weibull_cdf
from ..saddle.contour import K_CAP
from .config import ExperimentConfig
from .pool import draw, prepare, run_trials
from .report import ExperimentReport
from .statistics import ks_distance, moments

# β_c ± this step for the continuity check of the limit
CONTINUITY_STEP = 1e-4


@dataclass(frozen=True)
class FreeEnergyTrial:
    measure: Measure
    lam: float
    N: int
    beta: float
    master_seed: int
    method: str
    exact: bool
    cache_dir: Optional[str] = None


def free_energy_trial(context: FreeEnergyTrial, index: int) -> dict:
    """Free energy and saddle diagnostics of one sampled spectrum."""
    sample = draw(context.measure, context.lam, context.N, context.master_seed, index, cache_dir=context.cache_dir)
    data = saddle_data(sample, context.beta, context.method)
    return {
        "trial": index,
        "seed": sample.seed,
        "lambda_1": sample.lambda_1,
        "gamma": data.gamma,
        "R_gamma": data.R_gamma,
        "R2": data.R2,
        "K": data.K,
        "F_N": data.free_energy(context.exact),
        "method": data.method,
    }


def _trial_table(
    cfg: ExperimentConfig,
    measure: Measure,
    beta: float,
    threads: Optional[int],
    cache_dir: Optional[str],
    N: Optional[int] = None,
) -> pd.DataFrame:
    context = FreeEnergyTrial(
        measure=measure,
        lam=cfg.lam,
        N=N or cfg.N,
        beta=beta,
        master_seed=cfg.master_seed,
        method=cfg.method,
        exact=cfg.exact,
        cache_dir=cache_dir,
    )
    return pd.DataFrame(run_trials(free_energy_trial, context, cfg.trials, threads))


def _check_K(report: ExperimentReport, table: pd.DataFrame, N: int) -> None:
    outside = table[(table["K"] < N**-10) | (table["K"] > K_CAP)]
    if len(outside.index):
        report.warn(f"K left [N^-10, {K_CAP:g}] in {len(outside.index)} trial(s).")


def run_low_temp(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Weibull fluctuations of the free energy for β > β_c.

    Each trial computes
    I_N = N^{1/(b+1)} (F_N + ½log(2eβ) + ½∫log(L_+ - t)dμ_fc(t) - βL_+)/(β - β_c)
    and N^{1/(b+1)}(λ_1 - L_+); both are compared with
    exp(-C_μ(-s)^{b+1}/(b+1)).

    Raises:
        RegimeViolation: the config is outside b > 11, 1 < a < (b²-6b-7)/4, λ > max(λ_±), β > β_c.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    beta_c = fc.beta_c()
    beta = cfg.resolve_beta(beta_c)
    b, N = measure.b, cfg.N
    c_mu = fc.edges.c_mu
    log_edge = fc.log_integral(fc.L_plus)

    table = _trial_table(cfg, measure, beta, threads, cache_dir)
    scale = N ** (1.0 / (b + 1))
    table["I_N"] = scale * (table["F_N"] + 0.5 * math.log(2 * math.e * beta) + 0.5 * log_edge - beta * fc.L_plus) / (beta - beta_c)
    table["lambda1_stat"] = scale * (table["lambda_1"] - fc.L_plus)

    def cdf(s):
        return weibull_cdf(c_mu, b, np.minimum(s, 0.0))

    report = ExperimentReport(cfg, table)
    _check_K(report, table, N)
    ks_free_energy = ks_distance(table["I_N"], cdf)
    ks_lambda1 = ks_distance(table["lambda1_stat"], cdf)
    report.check("ks_free_energy", ks_free_energy, "ks_free_energy", cfg.tolerance("ks_free_energy"))
    report.check("ks_lambda1", ks_lambda1, "ks_lambda1", cfg.tolerance("ks_lambda1"))
    report.summary.update(
        {
            "beta": beta,
            "beta_c": beta_c,
            "L_plus": fc.L_plus,
            "c_mu": c_mu,
            "F_limit": fc.limiting_free_energy(beta),
            "median_F_N": float(table["F_N"].median()),
            "ks_distance": ks_free_energy,
            "ks_lambda1": ks_lambda1,
        }
    )
    report.summary.update(moments(table["I_N"]))
    report.runtime_seconds = time.perf_counter() - start
    return report


def run_high_temp(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Gaussian fluctuations of the free energy for β < β_c.

    Each trial computes 2√N(F_N + ½log(2βe) - βγ̂ + ½∫log(γ̂ - t)dμ_fc(t)),
    whose variance is compared with the contour variance of log(γ̂ - ·).
    β within near_critical_fraction of β_c is flagged and its tolerances are
    widened by near_critical_widening.

    Raises:
        RegimeViolation: the config is outside a > 1, b > 37/3, λ > max(λ_±), β < β_c.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    beta_c = fc.beta_c()
    beta = cfg.resolve_beta(beta_c)
    solution = fc.gamma_hat(beta)
    gamma_hat = solution.gamma_hat
    log_gamma = fc.log_integral(gamma_hat)

    table = _trial_table(cfg, measure, beta, threads, cache_dir)
    table["statistic"] = 2 * math.sqrt(cfg.N) * (
        table["F_N"] + 0.5 * math.log(2 * beta * math.e) - beta * gamma_hat + 0.5 * log_gamma
    )
    table["gamma_gap"] = (table["gamma"] - gamma_hat).abs()

    report = ExperimentReport(cfg, table)
    _check_K(report, table, cfg.N)
    widening = 1.0
    if beta > (1 - cfg.tolerance("near_critical_fraction")) * beta_c:
        widening = cfg.tolerance("near_critical_widening")
        report.warn(f"β={beta:.6g} is within {cfg.tolerance('near_critical_fraction'):g} of β_c={beta_c:.6g}, γ̂ - L_+ = {gamma_hat - fc.L_plus:.3e}; tolerances widened by {widening:g}.")

    theory = solution.variance
    stats = moments(table["statistic"])
    ratio = abs(stats["empirical_variance"] / theory - 1) if theory > 0 else math.inf
    ks = ks_distance(table["statistic"], norm(loc=0.0, scale=math.sqrt(theory)).cdf) if theory > 0 else 1.0
    report.check("variance_ratio", ratio, "variance_ratio", widening * cfg.tolerance("variance_ratio"))
    report.check(
        "mean",
        abs(stats["empirical_mean"]),
        "mean_sigmas",
        widening * cfg.tolerance("mean_sigmas") * math.sqrt(theory / cfg.trials),
    )
    report.check("ks_gaussian", ks, "ks_gaussian", widening * cfg.tolerance("ks_gaussian"))
    report.summary.update(
        {
            "beta": beta,
            "beta_c": beta_c,
            "gamma_hat": gamma_hat,
            "L_plus": fc.L_plus,
            "F_limit": solution.F_limit,
            "theory_variance": theory,
            "ks_distance": ks,
            "max_gamma_gap": float(table["gamma_gap"].max()),
        }
    )
    report.summary.update(stats)
    report.runtime_seconds = time.perf_counter() - start
    return report


def run_laplace_error(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Accuracy of the Laplace approximation of K at high temperature.

    Each trial records w_N = K√(NR''(γ)/(4π)) - 1 with K from the configured
    method; the share of trials with |w_N| <= N^{-1/3} is judged against
    laplace_pass_rate.

    Raises:
        RegimeViolation: the config is outside a > 1, b > 37/3, λ > max(λ_±), β < β_c, or asks for the laplace K method.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    beta_c = fc.beta_c()
    beta = cfg.resolve_beta(beta_c)

    table = _trial_table(cfg, measure, beta, threads, cache_dir)
    bound = cfg.N ** (-1.0 / 3.0)
    table["laplace_error"] = table["K"] * np.sqrt(cfg.N * table["R2"] / (4 * math.pi)) - 1.0
    table["within_bound"] = table["laplace_error"].abs() <= bound

    report = ExperimentReport(cfg, table)
    _check_K(report, table, cfg.N)
    pass_rate = float(table["within_bound"].mean())
    report.check("laplace_pass_rate", pass_rate, "laplace_pass_rate", cfg.tolerance("laplace_pass_rate"), below=False)
    report.summary.update(
        {
            "beta": beta,
            "beta_c": beta_c,
            "bound": bound,
            "pass_rate": pass_rate,
            "median_abs_laplace_error": float(table["laplace_error"].abs().median()),
            "max_abs_laplace_error": float(table["laplace_error"].abs().max()),
        }
    )
    report.runtime_seconds = time.perf_counter() - start
    return report


def run_free_energy_limit(cfg: ExperimentConfig, threads: Optional[int] = None, cache_dir: Optional[str] = None) -> ExperimentReport:
    """Convergence of F_N to its limit F(β) across matrix sizes.

    For every size in cfg.sizes the median of |F_N - F(β)| over the trials
    must stay below free_energy_constant·N^{-1/(b+1)}. The median at the
    largest size must be below the median at the smallest one, while the
    pairwise decrease between neighbouring sizes is reported only. The limit
    itself is checked for continuity across β_c.

    Raises:
        RegimeViolation: the config is outside b > 1, λ > λ_+, β > 0.
    """
    start = time.perf_counter()
    measure, fc = prepare(cfg)
    beta_c = fc.beta_c()
    beta = cfg.resolve_beta(beta_c)
    F_limit = fc.limiting_free_energy(beta)
    b = measure.b
    sizes = sorted(set(cfg.sizes or [cfg.N]))

    frames = []
    for size in sizes:
        LOGGER.info(f"Free energy limit: N={size}, β={beta:g}.")
        frame = _trial_table(cfg, measure, beta, threads, cache_dir, N=size)
        frame.insert(0, "N", size)
        frames.append(frame)
    table = pd.concat(frames, ignore_index=True)
    table["error"] = (table["F_N"] - F_limit).abs()
    medians = table.groupby("N")["error"].median()

    report = ExperimentReport(cfg, table)
    for size, frame in zip(sizes, frames):
        _check_K(report, frame, size)
    constant = cfg.tolerance("free_energy_constant")
    for size, median in medians.items():
        report.check(f"median_error_N{size}", float(median), "free_energy_constant", constant * size ** (-1.0 / (b + 1)))
    monotone = bool(np.all(np.diff(medians.to_numpy()) < 0))
    if len(sizes) > 1:
        report.check(
            "median_error_ratio",
            float(medians.iloc[-1] / medians.iloc[0]),
            "free_energy_decrease",
            cfg.tolerance("free_energy_decrease"),
        )
        report.check("median_error_pairwise_decrease", float(monotone), "free_energy_decrease", 1.0, below=False, asserted=False)

    jump = abs(fc.limiting_free_energy(beta_c - CONTINUITY_STEP) - fc.limiting_free_energy(beta_c + CONTINUITY_STEP))
    report.check("continuity_at_beta_c", jump, "free_energy_continuity", cfg.tolerance("free_energy_continuity"))
    report.summary.update(
        {
            "beta": beta,
            "beta_c": beta_c,
            "phase": fc.phase(beta),
            "F_limit": F_limit,
            "sizes": sizes,
            "median_errors": [float(value) for value in medians.to_numpy()],
            "pairwise_decrease": monotone,
            "continuity_jump": jump,
        }
    )
    report.runtime_seconds = time.perf_counter() - start
    return report
