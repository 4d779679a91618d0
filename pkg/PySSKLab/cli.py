from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .core import lab
from .errors import ConfigError, LabError, ParseError, RegimeViolation
from .experiments import DEFAULT_TOLERANCES, ExperimentConfig, draw, run_experiment, validate
from .freeconv import FreeConvolution
from .logger import LOGGER, log_to_file
from .measure import measure_from_dict
from .methods import EXPERIMENTS, STEEPEST_DESCENT
from .saddle import saddle_data
from .spectra import eigenvalue_frame
from .util import write_csv, write_json, write_manifest

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SCHEMA_EXCERPT = """Config schema (JSON):
  {"measure": {"a": 12, "b": 12, "d": {"poly": [1]}} | {"point_mass": 0} | {"atoms": [...], "weights": [...]},
   "lambda": 2.0, "beta": 0.5 | "beta_ratio": 2.0, "N": 1000, "trials": 500, "seed": 42,
   "experiment": "low_temp | high_temp | lss | rigidity | local_law | extreme_eig | laplace_error | free_energy_limit",
   "tolerances": {"ks_free_energy": 0.10, ...}, "f_spec": [0, 1], "zeta": 0.01, "kappa": 1.0,
   "method": "steepest_descent | vertical_line | laplace", "exact": false, "sizes": [500, 1000]}"""

CSV_DEFAULT = {"density", "classical", "simulate"}


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """Read a JSON config.

    Raises:
        ParseError: the file is not valid JSON or not an object.
    """
    if path is None:
        return {}
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(f"{path}: {error.msg}", error.lineno, error.colno)
    if not isinstance(data, dict):
        raise ParseError(f"{path}: the config must be a JSON object")
    return data


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply key=value overrides; dotted keys reach into nested maps and must already exist.

    Raises:
        ConfigError: an override is malformed or names an unknown key.
    """
    known = set(ExperimentConfig.__dataclass_fields__) | {"lambda", "seed"}
    violations = []
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            violations.append(f"override '{item}' is not key=value")
            continue
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        *parents, leaf = key.split(".")
        target = data
        if parents == ["tolerances"]:
            target = data.setdefault("tolerances", {})
            exists = leaf in DEFAULT_TOLERANCES
        else:
            for parent in parents:
                target = target.get(parent) if isinstance(target, dict) else None
            exists = isinstance(target, dict) and (leaf in target or (not parents and leaf in known))
        if not exists:
            violations.append(f"override '{key}' names no existing config key")
            continue
        target[leaf] = value
    if violations:
        raise ConfigError(violations)
    return data


def validate_config(
    path: Optional[str], overrides: Sequence[str] = (), experiment: Optional[str] = None
) -> Tuple[Optional[ExperimentConfig], List[str]]:
    """Load, override and check an experiment config.

    Returns:
        Tuple: the fully defaulted config, or None, and the complete list of violations.

    Raises:
        ParseError: the file is not valid JSON.
    """
    data = load_config(path)
    try:
        apply_overrides(data, overrides)
    except ConfigError as error:
        return None, error.violations
    if experiment is not None:
        data["experiment"] = experiment
    config, violations = ExperimentConfig.from_dict(data)
    if config is None:
        return None, violations
    violations = validate(config)
    return (config, []) if not violations else (None, violations)


def _analytic_inputs(data: Dict[str, Any]) -> Tuple[FreeConvolution, Dict[str, Any]]:
    violations = [f"missing required field '{key}'" for key in ("measure", "lambda") if key not in data]
    if violations:
        raise ConfigError(violations)
    try:
        measure = measure_from_dict(data["measure"])
    except ValueError as error:
        raise ConfigError([f"invalid measure: {error}"])
    return FreeConvolution(measure, float(data["lambda"])), data


def _beta(args: argparse.Namespace, data: Dict[str, Any], fc: FreeConvolution) -> float:
    if args.beta is not None:
        return float(args.beta)
    if data.get("beta") is not None:
        return float(data["beta"])
    if data.get("beta_ratio") is not None:
        return float(data["beta_ratio"]) * fc.beta_c()
    raise ConfigError(["missing 'beta': pass --beta or set beta or beta_ratio in the config"])


def _emit(args: argparse.Namespace, name: str, record: Any = None, frame: Optional[pd.DataFrame] = None) -> List[str]:
    fmt = args.format or ("csv" if args.command in CSV_DEFAULT else "json")
    if fmt == "csv":
        if frame is None:
            frame = pd.DataFrame([record] if isinstance(record, dict) else record)
        return [write_csv(os.path.join(args.out_dir, f"{name}.csv"), frame)]
    if record is None:
        record = frame.to_dict(orient="list")
    return [write_json(os.path.join(args.out_dir, f"{name}.json"), record)]


def _cmd_mfc(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    z = np.array([complex(value.replace(" ", "")) for value in args.z])
    m = np.atleast_1d(fc.solve_mfc(z))
    frame = pd.DataFrame({"z_re": z.real, "z_im": z.imag, "m_re": m.real, "m_im": m.imag})
    return _emit(args, "mfc", frame=frame)


def _cmd_density(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    LOGGER.info(f"Density grid mass {fc.grid.mass():.8f}.")
    return _emit(args, "density", frame=fc.density_frame())


def _cmd_edges(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    return _emit(args, "edges", record=fc.summary())


def _cmd_betac(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    return _emit(args, "betac", record={"lambda": fc.lam, "L_plus": fc.L_plus, "beta_c": fc.beta_c()})


def _cmd_gamma_hat(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    return _emit(args, "gamma_hat", record=fc.gamma_hat(_beta(args, data, fc)).to_dict())


def _cmd_classical(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    N = args.N or data.get("N")
    if N is None:
        raise ConfigError(["missing 'N': pass --N or set N in the config"])
    return _emit(args, "classical", frame=fc.classical_frame(int(N)))


def _cmd_free_energy(args, data) -> List[str]:
    fc, _ = _analytic_inputs(data)
    beta = _beta(args, data, fc)
    record = {"beta": beta, "beta_c": fc.beta_c(), "phase": fc.phase(beta), "F_limit": fc.limiting_free_energy(beta)}
    outputs = _emit(args, "free_energy", record=record)
    if data.get("N") is not None:
        method = data.get("method", STEEPEST_DESCENT)
        exact = bool(data.get("exact", False))
        rows = []
        for index in range(int(data.get("trials", 1))):
            sample = draw(fc.measure, fc.lam, int(data["N"]), int(data.get("seed", 0)), index, cache_dir=lab.cache_dir)
            saddle = saddle_data(sample, beta, method)
            rows.append(
                {
                    "trial": index,
                    "gamma": saddle.gamma,
                    "R_gamma": saddle.R_gamma,
                    "R2": saddle.R2,
                    "K": saddle.K,
                    "F_N": saddle.free_energy(exact),
                    "method": saddle.method,
                }
            )
        outputs.append(write_csv(os.path.join(args.out_dir, "saddle.csv"), pd.DataFrame(rows)))
    return outputs


def _cmd_simulate(args, data) -> List[str]:
    violations = [f"missing required field '{key}'" for key in ("measure", "lambda", "N") if key not in data]
    if violations:
        raise ConfigError(violations)
    try:
        measure = measure_from_dict(data["measure"])
    except ValueError as error:
        raise ConfigError([f"invalid measure: {error}"])
    samples = [
        draw(measure, float(data["lambda"]), int(data["N"]), int(data.get("seed", 0)), index, cache_dir=lab.cache_dir)
        for index in range(int(data.get("trials", 1)))
    ]
    return _emit(args, "eigenvalues", frame=eigenvalue_frame(samples))


def _cmd_experiment(args, data) -> Tuple[List[str], bool]:
    config, violations = validate_config(args.config, args.set, args.kind)
    if config is None:
        raise ConfigError(violations)
    if args.seed is not None:
        config.master_seed = args.seed
    report = run_experiment(config, threads=args.threads)
    json_path = os.path.join(args.out_dir, "report.json")
    csv_path = os.path.join(args.out_dir, "trials.csv")
    report.to_json(json_path)
    report.to_csv(csv_path)
    return [json_path, csv_path], report.passed


COMMANDS = {
    "mfc": _cmd_mfc,
    "density": _cmd_density,
    "edges": _cmd_edges,
    "betac": _cmd_betac,
    "gamma-hat": _cmd_gamma_hat,
    "classical": _cmd_classical,
    "free-energy": _cmd_free_energy,
    "simulate": _cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="JSON config file.")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="Override a config key; dotted keys reach nested maps. Repeatable.")
    common.add_argument("--out-dir", type=str, default="out", help="Output directory (default: out).")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="Output format (default: csv for tables, json otherwise).")
    common.add_argument("--seed", type=int, default=None, help="Master seed, overrides the config.")
    common.add_argument("--threads", type=int, default=None, help="Worker processes (default: SSKLAB_THREADS or all cores).")

    parser = argparse.ArgumentParser(prog="ssklab", description="Free energy and spectra of deformed Wigner matrices.")
    commands = parser.add_subparsers(dest="command", required=True)
    mfc = commands.add_parser("mfc", parents=[common], help="Stieltjes transform of the free convolution.")
    mfc.add_argument("--z", action="append", required=True, help="Complex point such as 0.5+1j. Repeatable.")
    commands.add_parser("density", parents=[common], help="Density grid x, rho of the free convolution.")
    commands.add_parser("edges", parents=[common], help="Support edges, thresholds and β_c.")
    commands.add_parser("betac", parents=[common], help="Critical inverse temperature.")
    gamma_hat = commands.add_parser("gamma-hat", parents=[common], help="High temperature saddle γ̂ and its variance.")
    gamma_hat.add_argument("--beta", type=float, default=None, help="Inverse temperature, overrides the config.")
    classical = commands.add_parser("classical", parents=[common], help="Classical eigenvalue locations.")
    classical.add_argument("--N", type=int, default=None, help="Matrix size, overrides the config.")
    free_energy = commands.add_parser("free-energy", parents=[common], help="Limiting free energy and per-sample F_N.")
    free_energy.add_argument("--beta", type=float, default=None, help="Inverse temperature, overrides the config.")
    commands.add_parser("simulate", parents=[common], help="Sample spectra and dump eigenvalues.")
    experiment = commands.add_parser("experiment", parents=[common], help="Run a Monte-Carlo experiment.")
    experiment.add_argument("kind", choices=EXPERIMENTS)
    return parser


def dispatch(args: argparse.Namespace, argv: Sequence[str] = ()) -> int:
    """Run one parsed invocation and return its exit code."""
    start = time.perf_counter()
    if args.threads is not None:
        lab.threads = args.threads
    os.makedirs(args.out_dir, exist_ok=True)
    handler = log_to_file(os.path.join(args.out_dir, "run.log"))
    passed = True
    try:
        data = apply_overrides(load_config(args.config), args.set)
        if args.seed is not None:
            data["seed"] = args.seed
        if args.command == "experiment":
            data["experiment"] = args.kind
            outputs, passed = _cmd_experiment(args, data)
        else:
            outputs = COMMANDS[args.command](args, data)
    except (ConfigError, ParseError, RegimeViolation, FileNotFoundError) as error:
        LOGGER.error(f"{args.command}: {error}")
        print(f"ssklab {args.command}: {error}\n\n{SCHEMA_EXCERPT}", file=sys.stderr)
        return EXIT_USAGE
    except LabError as error:
        LOGGER.error(f"{args.command}: {error}")
        print(f"ssklab {args.command}: {error}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        LOGGER.removeHandler(handler)
        handler.close()
    write_manifest(args.out_dir, data, time.perf_counter() - start, ["ssklab", *argv], outputs)
    return EXIT_OK if passed else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    return dispatch(args, argv)
