"""
Artifact Utils

This module contains helpers for writing and reading run artifacts.

Functions:
    frontier_frame(front) -> pd.DataFrame:
        One row per frontier point: hyperparameters, log_D, N.
    write_csv(frame: pd.DataFrame, path: str) -> str:
        Writes a CSV with full float precision so reruns compare byte for byte.
    write_json(payload: dict, path: str) -> str:
        Writes sorted, indented JSON; numpy scalars and arrays are converted.
    read_frontier(path: str) -> FrontierTable:
        Parses a frontier.csv back into arrays for a standalone kappa sweep.
"""
from dataclasses import dataclass
from typing import Any, Dict, Tuple
import json
import logging
import os

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
OBJECTIVE_COLUMNS = ("log_D", "N")


@dataclass(frozen=True)
class FrontierTable:
    lam: np.ndarray
    log_d: np.ndarray
    n_value: np.ndarray
    names: Tuple[str, ...]


def frontier_frame(front) -> pd.DataFrame:
    frame = pd.DataFrame(np.atleast_2d(front.lam), columns=list(front.names))
    frame["log_D"] = front.log_d
    frame["N"] = front.n_value
    return frame


def write_csv(frame: pd.DataFrame, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def _to_builtin(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _to_builtin(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(payload: Dict[str, Any], path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_to_builtin(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_frontier(path: str) -> FrontierTable:
    """
    Raises:
        ValueError: When the file is not a frontier table.
    """
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ValueError(f"{path}: malformed frontier CSV ({e})") from e
    missing = [c for c in OBJECTIVE_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing frontier columns {missing}")
    names = tuple(c for c in frame.columns if c not in OBJECTIVE_COLUMNS)
    if not names or frame.empty:
        raise ValueError(f"{path}: frontier needs at least one hyperparameter column and one row")
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise ValueError(f"{path}: non-numeric frontier entries ({e})") from e
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: frontier entries must be finite")
    return FrontierTable(frame[list(names)].to_numpy(dtype=float), frame["log_D"].to_numpy(dtype=float),
                         frame["N"].to_numpy(dtype=float), names)
