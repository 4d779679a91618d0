from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Tuple

from ..errors import DivergentIntegral
from ..measure import edge_constants, measure_from_dict
from ..methods import (
    EXPERIMENTS,
    EXTREME_EIG,
    FREE_ENERGY_LIMIT,
    HIGH_TEMP,
    K_METHODS,
    LAPLACE,
    LAPLACE_ERROR,
    LOCAL_LAW,
    LOW_TEMP,
    LSS,
    RIGIDITY,
    STEEPEST_DESCENT,
)

TOLERANCE_VERSION = "2024.2"

DEFAULT_TOLERANCES: Dict[str, float] = {
    "ks_free_energy": 0.10,
    "ks_lambda1": 0.08,
    "ks_gaussian": 0.08,
    "ks_lower_edge": 0.08,
    "variance_ratio": 0.25,
    "mean_sigmas": 3.0,
    "rigidity_pass_rate": 0.90,
    "local_law_pass_rate": 0.95,
    "ward_residual": 1e-8,
    "near_critical_fraction": 0.02,
    "near_critical_widening": 1.5,
    "local_law_epsilon": 0.1,
    "laplace_pass_rate": 0.90,
    "free_energy_constant": 5.0,
    "free_energy_decrease": 1.0,
    "free_energy_continuity": 1e-3,
}

CALIBRATION_NOTE = (
    "Pass thresholds are pilot-calibrated finite-N proxies for limit theorems; "
    "they carry no asymptotic guarantee."
)

LOCAL_LAW_MAX_N = 2000
REQUIRED = ("measure", "lambda", "N", "experiment")
# JSON keys that differ from the attribute names
ALIASES = {"lambda": "lam", "seed": "master_seed"}


@dataclass
class ExperimentConfig:
    """Everything an experiment run depends on.

    beta may be given directly or as beta_ratio, a multiple of β_c resolved
    once the free convolution is known. f_spec holds polynomial coefficients
    in increasing degree for linear statistics. sizes lists the matrix sizes
    of a free_energy_limit run and defaults to N alone.
    """

    measure: Dict[str, Any]
    lam: float
    N: int
    experiment: str
    beta: Optional[float] = None
    beta_ratio: Optional[float] = None
    trials: int = 100
    master_seed: int = 0
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    f_spec: Optional[List[float]] = None
    zeta: float = 0.01
    kappa: float = 1.0
    method: str = STEEPEST_DESCENT
    exact: bool = False
    sizes: Optional[List[int]] = None

    def __post_init__(self) -> None:
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.tolerances or {})
        self.tolerances = merged

    def tolerance(self, key: str) -> float:
        return float(self.tolerances[key])

    def resolve_beta(self, beta_c: Optional[float]) -> Optional[float]:
        """Returns β, turning beta_ratio into a multiple of β_c."""
        if self.beta is not None:
            return float(self.beta)
        if self.beta_ratio is not None and beta_c is not None:
            return float(self.beta_ratio) * beta_c
        return None

    def to_dict(self) -> dict:
        record = {}
        for item in fields(self):
            key = next((alias for alias, name in ALIASES.items() if name == item.name), item.name)
            record[key] = getattr(self, item.name)
        return record

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> Tuple[Optional[ExperimentConfig], List[str]]:
        """Build a config from its JSON form.

        Returns:
            Tuple: the config, or None, and every violation found.
        """
        violations = [f"missing required field '{key}'" for key in REQUIRED if key not in data]
        known = {item.name for item in fields(cls)}
        arguments = {}
        for key, value in data.items():
            name = ALIASES.get(key, key)
            if name not in known:
                violations.append(f"unknown field '{key}'")
                continue
            arguments[name] = value
        for name, kind in (("lam", float), ("N", int), ("trials", int), ("master_seed", int), ("zeta", float), ("kappa", float)):
            if name in arguments:
                try:
                    arguments[name] = kind(arguments[name])
                except (TypeError, ValueError):
                    violations.append(f"field '{name}' must be {kind.__name__}, got {arguments[name]!r}")
        for name in ("beta", "beta_ratio"):
            if arguments.get(name) is not None:
                try:
                    arguments[name] = float(arguments[name])
                except (TypeError, ValueError):
                    violations.append(f"field '{name}' must be float, got {arguments[name]!r}")
        if arguments.get("sizes") is not None:
            try:
                arguments["sizes"] = [int(size) for size in arguments["sizes"]]
            except (TypeError, ValueError):
                violations.append(f"field 'sizes' must be a list of int, got {arguments['sizes']!r}")
        if "tolerances" in arguments:
            unknown = sorted(set(arguments["tolerances"]) - set(DEFAULT_TOLERANCES))
            violations.extend(f"unknown tolerance '{key}'" for key in unknown)
        if violations:
            return None, violations
        return cls(**arguments), []


def _exponents(cfg: ExperimentConfig) -> Tuple[Optional[float], Optional[float]]:
    a, b = cfg.measure.get("a"), cfg.measure.get("b")
    return (None if a is None else float(a)), (None if b is None else float(b))


def validate(cfg: ExperimentConfig, fc=None) -> List[str]:
    """Every violated precondition of an experiment, as readable sentences.

    Regime hypotheses on a, b and λ are checked from the config alone; the
    position of β relative to β_c needs the free convolution fc.
    """
    violations = []
    if cfg.experiment not in EXPERIMENTS:
        violations.append(f"experiment must be one of {', '.join(EXPERIMENTS)}, got '{cfg.experiment}'")
    if cfg.trials < 1:
        violations.append(f"trials must be >= 1, got {cfg.trials}")
    if cfg.N < 2:
        violations.append(f"N must be >= 2, got {cfg.N}")
    if cfg.lam <= 0:
        violations.append(f"lambda must be > 0, got {cfg.lam}")
    if cfg.method not in K_METHODS:
        violations.append(f"method must be one of {', '.join(K_METHODS)}, got '{cfg.method}'")
    if violations:
        return violations

    try:
        measure = measure_from_dict(cfg.measure)
    except (ValueError, DivergentIntegral) as error:
        return [f"invalid measure: {error}"]
    a, b = _exponents(cfg)
    if a is None or b is None:
        return [f"{cfg.experiment} needs a Jacobi measure with exponents a and b"]
    edges = edge_constants(measure, cfg.lam)
    above_both = edges.above_plus and edges.above_minus
    threshold = max(edges.lambda_plus, edges.lambda_minus)

    def require(condition: bool, message: str) -> None:
        if not condition:
            violations.append(message)

    if cfg.experiment == LOW_TEMP:
        require(b > 11, f"low_temp requires b>11, got b={b:g}")
        require(1 < a < (b**2 - 6 * b - 7) / 4, f"low_temp requires 1<a<(b²-6b-7)/4, got a={a:g}, b={b:g}")
        require(above_both, f"low_temp requires λ>max(λ+, λ-)={threshold:.6g}, got λ={cfg.lam:g}")
    elif cfg.experiment in (HIGH_TEMP, LSS, LAPLACE_ERROR):
        require(a > 1, f"{cfg.experiment} requires a>1, got a={a:g}")
        require(b > 37 / 3, f"{cfg.experiment} requires b>37/3, got b={b:g}")
        require(above_both, f"{cfg.experiment} requires λ>max(λ+, λ-)={threshold:.6g}, got λ={cfg.lam:g}")
        if cfg.experiment == LSS:
            require(bool(cfg.f_spec), "lss requires f_spec, the polynomial coefficients of f")
        if cfg.experiment == LAPLACE_ERROR:
            require(cfg.method != LAPLACE, "laplace_error compares K with its Laplace value and needs another K method")
    elif cfg.experiment == RIGIDITY:
        require(a > 1, f"rigidity requires a>1, got a={a:g}")
        require(b > 3, f"rigidity requires b>3, got b={b:g}")
    elif cfg.experiment == LOCAL_LAW:
        require(cfg.N <= LOCAL_LAW_MAX_N, f"local_law requires N<={LOCAL_LAW_MAX_N}, got N={cfg.N}")
        require(cfg.N ** -0.25 < 0.5, f"local_law requires N^(-1/4)<0.5 so the z-grid lies in the domain, got N={cfg.N}")
    elif cfg.experiment == EXTREME_EIG:
        require(a > 1, f"extreme_eig requires a>1, got a={a:g}")
        require(edges.above_minus, f"extreme_eig requires λ>λ-={edges.lambda_minus:.6g}, got λ={cfg.lam:g}")
    elif cfg.experiment == FREE_ENERGY_LIMIT:
        require(b > 1, f"free_energy_limit requires b>1, got b={b:g}")
        require(edges.above_plus, f"free_energy_limit requires λ>λ+={edges.lambda_plus:.6g}, got λ={cfg.lam:g}")
        small = [size for size in (cfg.sizes or []) if size < 2]
        require(not small, f"free_energy_limit sizes must be >= 2, got {small}")

    if cfg.experiment in (LOW_TEMP, HIGH_TEMP, LAPLACE_ERROR, FREE_ENERGY_LIMIT):
        if cfg.beta is None and cfg.beta_ratio is None:
            violations.append(f"{cfg.experiment} requires beta or beta_ratio")
        elif fc is not None and not violations:
            beta_c = fc.beta_c()
            beta = cfg.resolve_beta(beta_c)
            if cfg.experiment == LOW_TEMP:
                require(beta > beta_c, f"low_temp requires β>β_c={beta_c:.8g}, got β={beta:.8g}")
            elif cfg.experiment == FREE_ENERGY_LIMIT:
                require(beta > 0, f"beta must be > 0, got {beta}")
            else:
                require(0 < beta < beta_c, f"{cfg.experiment} requires 0<β<β_c={beta_c:.8g}, got β={beta:.8g}")
        elif cfg.beta is not None and cfg.beta <= 0:
            violations.append(f"beta must be > 0, got {cfg.beta}")
    return violations
