from __future__ import annotations

import hashlib
import json
import math
import os
import platform
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
import scipy

ARTIFACT_VERSION = "0.1.0"


def plain(value: Any) -> Any:
    """Convert numpy scalars, arrays and non-finite floats into JSON-ready values."""
    if isinstance(value, dict):
        return {str(key): plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {"re": plain(value.real), "im": plain(value.imag)}
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def config_hash(config: Dict[str, Any]) -> str:
    """Returns the sha256 digest of the canonical JSON form of a config."""
    canonical = json.dumps(plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_json(path: str, data: Any) -> str:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(plain(data), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def write_csv(path: str, frame: pd.DataFrame) -> str:
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def versions() -> Dict[str, str]:
    """Returns the versions of the interpreter and the numerical stack."""
    return {
        "PySSKLab": ARTIFACT_VERSION,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def write_manifest(
    out_dir: str,
    config: Dict[str, Any],
    runtime_seconds: float,
    command: Optional[Sequence[str]] = None,
    outputs: Optional[Sequence[str]] = None,
) -> str:
    """Write manifest.json: everything needed to reproduce a run."""
    manifest = {
        "config_hash": config_hash(config),
        "artifact_version": ARTIFACT_VERSION,
        "runtime_seconds": runtime_seconds,
        "command": list(command or []),
        "config": config,
        "outputs": [os.path.basename(path) for path in outputs or []],
        "versions": versions(),
    }
    return write_json(os.path.join(out_dir, "manifest.json"), manifest)
