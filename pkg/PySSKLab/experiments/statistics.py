from __future__ import annotations

from typing import Callable, Dict

import numpy as np
from scipy.stats import kstest


def ks_distance(samples, cdf: Callable) -> float:
    """Kolmogorov distance sup_s |F_n(s) - cdf(s)| between the empirical CDF of samples and cdf.

    The supremum is exact: it is attained at the sorted samples.
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("KS distance needs at least one sample.")
    return float(kstest(samples, cdf).statistic)


def moments(values) -> Dict[str, float]:
    """Returns the mean, unbiased variance and standard error of values."""
    values = np.asarray(values, dtype=float)
    variance = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return {
        "empirical_mean": float(np.mean(values)),
        "empirical_variance": variance,
        "standard_error": float(np.sqrt(variance / values.size)),
    }
