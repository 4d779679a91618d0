from __future__ import annotations

from typing import Any, Dict, List, Optional

import pandas as pd
from randomname import get_name

from ..logger import LOGGER
from ..methods import FAILED, PASSED, REPORTED
from ..util import plain, write_csv, write_json
from .config import CALIBRATION_NOTE, TOLERANCE_VERSION, ExperimentConfig


class ExperimentReport:
    """Outcome of one experiment run.

    The per-trial statistics live in a pandas frame in trial order. Each
    criterion records the tolerance key it was judged against, and only
    asserted criteria decide whether the run passed.
    """

    _config: ExperimentConfig
    _table: pd.DataFrame

    def __init__(self, config: ExperimentConfig, table: pd.DataFrame, label: Optional[str] = None) -> None:
        self._config = config
        self._table = table
        self._label = label or get_name()
        self._criteria: List[Dict[str, Any]] = []
        self._summary: Dict[str, Any] = {}
        self._warnings: List[str] = []
        self._runtime = 0.0

    @property
    def config(self) -> ExperimentConfig:
        return self._config

    @property
    def table(self) -> pd.DataFrame:
        """Returns the per-trial statistics."""
        return self._table

    @property
    def label(self) -> str:
        return self._label

    @property
    def criteria(self) -> List[Dict[str, Any]]:
        return self._criteria

    @property
    def summary(self) -> Dict[str, Any]:
        return self._summary

    @property
    def warnings(self) -> List[str]:
        return self._warnings

    @property
    def runtime_seconds(self) -> float:
        return self._runtime

    @runtime_seconds.setter
    def runtime_seconds(self, value: float) -> None:
        self._runtime = float(value)

    @property
    def passed(self) -> bool:
        """Returns whether every asserted criterion passed."""
        return all(item["status"] != FAILED for item in self._criteria)

    def warn(self, message: str) -> None:
        LOGGER.warning(f"Experiment {self._label}: {message}")
        self._warnings.append(message)

    def check(
        self,
        name: str,
        value: float,
        tolerance_key: str,
        threshold: float,
        below: bool = True,
        asserted: bool = True,
    ) -> bool:
        """Record a criterion value < threshold (or >= threshold when below is False)."""
        ok = bool(value < threshold) if below else bool(value >= threshold)
        status = (PASSED if ok else FAILED) if asserted else REPORTED
        self._criteria.append(
            {
                "name": name,
                "value": float(value),
                "comparison": "<" if below else ">=",
                "threshold": float(threshold),
                "tolerance": tolerance_key,
                "passed": ok,
                "asserted": asserted,
                "status": status,
            }
        )
        LOGGER.info(f"Experiment {self._label}: {name}={value:.6g} {'<' if below else '>='} {threshold:.6g} [{tolerance_key}] {status}.")
        return ok

    def to_dict(self) -> dict:
        return plain(
            {
                "label": self._label,
                "experiment": self._config.experiment,
                "config": self._config.to_dict(),
                "summary": self._summary,
                "criteria": self._criteria,
                "passed": self.passed,
                "warnings": self._warnings,
                "runtime_seconds": self._runtime,
                "metadata": {
                    "tolerance_version": TOLERANCE_VERSION,
                    "calibration_note": CALIBRATION_NOTE,
                    "trials": int(len(self._table.index)),
                },
            }
        )

    def to_json(self, path: str) -> None:
        write_json(path, self.to_dict())

    def to_csv(self, path: str) -> None:
        """Write the per-trial table; equal configs give byte-identical files."""
        write_csv(path, self._table)
