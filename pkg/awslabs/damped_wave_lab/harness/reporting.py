#!/usr/bin/env python3
# reporting.py
"""
Report output: trace CSV tables, schema-checked JSON reports and binary state snapshots
"""

import json
import math
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Union

import jsonschema
import numpy as np
import pandas as pd
from loguru import logger

from .. import __version__
from ..core.diagnostics import energy_trace
from ..core.errors import DampedWaveError
from ..core.grid import State
from ..core.solver import SolutionTrace

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "schemas" / "report.schema.json"
TRACE_COLUMNS = ["t", "sup_u", "l2_u", "l2_w", "l2_grad_u", "energy", "b",
                 "kinetic", "dissipation", "q", "lp1_norm"]
FLOAT_FORMAT = "%.17g"


class ReportValidationError(DampedWaveError):
    """A report does not match the documented JSON schema"""


def json_safe(value: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


@lru_cache(maxsize=1)
def load_schema() -> Dict[str, Any]:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def validate_report(report: Dict[str, Any]) -> None:
    try:
        jsonschema.validate(instance=report, schema=load_schema())
    except jsonschema.ValidationError as exc:
        raise ReportValidationError(f"report does not match schema: {exc.message}") from exc


def build_report(kind: str, name: str, config: Dict[str, Any], results: Dict[str, Any],
                 checks: list, notes: list) -> Dict[str, Any]:
    report = json_safe({
        "version": __version__,
        "kind": kind,
        "name": name,
        "passed": all(check["passed"] for check in checks),
        "config": config,
        "results": results,
        "checks": checks,
        "notes": notes,
    })
    validate_report(report)
    return report


def check(name: str, passed: bool, **detail: Any) -> Dict[str, Any]:
    """One claim check of a report"""
    return {"name": name, "passed": bool(passed), "detail": detail}


def render_report(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2)


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    validate_report(report)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report) + "\n", encoding="utf-8")
    logger.info(f"report written to {path}")
    return path


def trace_frame(trace: SolutionTrace) -> pd.DataFrame:
    """One row per sample with the energy diagnostics"""
    return energy_trace(trace).to_frame()[TRACE_COLUMNS]


def render_table(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT)


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug(f"table with {len(frame)} rows written to {path}")
    return path


def write_trace_csv(trace: SolutionTrace, path: Union[str, Path]) -> Path:
    return write_table(trace_frame(trace), path)


def write_snapshot(state: State, path: Union[str, Path]) -> Path:
    """int64 J, float64 t, then J values of u and J values of u_t, little-endian"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = state.u.size
    with path.open("wb") as handle:
        handle.write(np.asarray([n], dtype="<i8").tobytes())
        handle.write(np.asarray([state.t], dtype="<f8").tobytes())
        handle.write(np.asarray(state.u, dtype="<f8").tobytes())
        handle.write(np.asarray(state.w, dtype="<f8").tobytes())
    return path


def read_snapshot(path: Union[str, Path]) -> State:
    raw = Path(path).read_bytes()
    n = int(np.frombuffer(raw, dtype="<i8", count=1)[0])
    if len(raw) != 16 + 16 * n:
        raise DampedWaveError(f"snapshot {path} is truncated: {len(raw)} bytes for {n} nodes")
    t = float(np.frombuffer(raw, dtype="<f8", count=1, offset=8)[0])
    u = np.frombuffer(raw, dtype="<f8", count=n, offset=16).astype(float)
    w = np.frombuffer(raw, dtype="<f8", count=n, offset=16 + 8 * n).astype(float)
    return State(t=t, u=u, w=w)


def write_snapshots(trace: SolutionTrace, directory: Union[str, Path], label: str) -> int:
    directory = Path(directory)
    for i in range(trace.n_samples):
        write_snapshot(trace.state(i), directory / f"{label}_{i:05d}.bin")
    return trace.n_samples
