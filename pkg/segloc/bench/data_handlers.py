"""
SegLoc Project - Bench Data Handlers
Reading and writing scenarios, measurement CSVs, localization results,
benchmark records and error tensors.
"""

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ..config.settings import BUILDING_HEIGHT, PACKAGE_CONFIG_DIR
from ..core.geometry import Building, EnvironmentMap2D
from ..core.localizer import ErrorTensor, LocalizationResult
from ..core.propagation import MeasurementSet, PropagationParams, PropagationTruth, Scenario
from ..core.segreg import SupportVectorAngle
from ..core.validators import validate_plan_data, validate_scenario_data

PathLike = Union[str, Path]

MEASUREMENT_COLUMNS = ["x", "y", "z", "rss_db", "los"]
RECORD_COLUMNS = ["method", "sweep_value", "trial_seed", "rmse_m", "runtime_ms"]
SUMMARY_COLUMNS = ["method", "sweep_value", "trials", "failures", "rmse_m"]

_LOS_TEXT = {"1": True, "0": False, "NA": None, "": None}

logger = logging.getLogger(__name__)


class MeasurementParseError(ValueError):
    """Raised when a measurement CSV line cannot be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def resolve_config_path(path: PathLike) -> Path:
    """
    Resolve a document path, falling back to the packaged config directory.

    ``plan_measurement_sweep.json`` therefore works from any directory.
    """
    candidate = Path(path)
    if candidate.exists():
        return candidate
    packaged = PACKAGE_CONFIG_DIR / candidate.name
    if packaged.exists():
        return packaged
    return candidate


def _read_json(path: PathLike) -> Any:
    with open(resolve_config_path(path), encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"{path} is not valid JSON: {e}") from e


def _write_json(path: PathLike, data: Any) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


# Scenarios


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """
    Build a scenario from its JSON document.

    Buildings without a ``height`` get the configured default height.

    Raises:
        ValueError: if the document is invalid
    """
    is_valid, error_message = validate_scenario_data(data)
    if not is_valid:
        raise ValueError(f"Invalid scenario: {error_message}")

    buildings = tuple(
        Building(
            tuple(tuple(v) for v in entry["vertices"]),
            entry.get("height") if entry.get("height") is not None else BUILDING_HEIGHT,
        )
        for entry in data["buildings"]
    )
    defaults = PropagationTruth()
    truth = PropagationTruth(
        **{
            name: float(data.get(name, getattr(defaults, name)))
            for name in (
                "power_db",
                "eta_los",
                "eta_nlos",
                "sigma_los",
                "sigma_nlos",
                "antenna_exponent",
            )
        }
    )
    return Scenario(
        map=EnvironmentMap2D(float(data["L"]), buildings),
        source=tuple(float(v) for v in data["source"]),
        aerial_height=float(data["h"]),
        truth=truth,
    )


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    truth = scenario.truth
    return {
        "L": scenario.map.size,
        "h": scenario.aerial_height,
        "source": list(scenario.source),
        "buildings": [
            {"vertices": [list(v) for v in b.footprint], "height": b.height}
            for b in scenario.map.buildings
        ],
        "power_db": truth.power_db,
        "eta_los": truth.eta_los,
        "eta_nlos": truth.eta_nlos,
        "sigma_los": truth.sigma_los,
        "sigma_nlos": truth.sigma_nlos,
        "antenna_exponent": truth.antenna_exponent,
    }


def load_scenario(path: Optional[PathLike] = None) -> Scenario:
    """Load a scenario JSON; without a path the reference scenario is returned."""
    if path is None:
        return Scenario.default()
    return scenario_from_dict(_read_json(path))


def save_scenario(path: PathLike, scenario: Scenario) -> None:
    _write_json(path, scenario_to_dict(scenario))


# Measurements


def write_measurements(path: PathLike, measurements: MeasurementSet) -> None:
    """
    Write ``x,y,z,rss_db,los`` rows; ``los`` is 1, 0 or NA.

    Floats are written with their shortest round-trip representation.
    """
    frame = measurements.frame
    out = pd.DataFrame(
        {
            column: [repr(float(v)) for v in frame[column]]
            for column in ("x", "y", "z", "rss_db")
        }
    )
    out["los"] = ["NA" if pd.isna(v) else str(int(bool(v))) for v in frame["los"]]

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(target, index=False, columns=MEASUREMENT_COLUMNS)
    logger.debug(f"Wrote {len(out)} measurements to {target}")


def _field(record: Dict[str, Any], column: str, line: int) -> str:
    # Short rows come back padded with NaN
    value = record[column]
    if not isinstance(value, str):
        raise MeasurementParseError(line, f"missing value for {column}")
    return value.strip()


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MeasurementParseError(line, f"{column} is not a number: {text!r}") from None
    if not np.isfinite(value):
        raise MeasurementParseError(line, f"{column} must be finite, got {text!r}")
    return value


def read_measurements(path: PathLike, with_truth: bool = True) -> MeasurementSet:
    """
    Read a measurement CSV.

    Args:
        path: CSV with header ``x,y,z,rss_db`` and an optional ``los`` column
        with_truth: When False the ``los`` column is not read at all

    Returns:
        MeasurementSet

    Raises:
        MeasurementParseError: naming the offending 1-based line
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise MeasurementParseError(1, "missing header") from None
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else 1
        raise MeasurementParseError(line, "wrong number of fields") from None

    missing = [c for c in MEASUREMENT_COLUMNS[:4] if c not in raw.columns]
    if missing:
        raise MeasurementParseError(1, f"header is missing columns {missing}")

    positions, rss, labels = [], [], []
    read_labels = with_truth and "los" in raw.columns
    for offset, row in enumerate(raw.itertuples(index=False)):
        # Header is line 1
        line = offset + 2
        record = row._asdict()
        positions.append(
            [_parse_float(_field(record, c, line), line, c) for c in ("x", "y", "z")]
        )
        rss.append(_parse_float(_field(record, "rss_db", line), line, "rss_db"))
        if read_labels:
            text = _field(record, "los", line)
            if text not in _LOS_TEXT:
                raise MeasurementParseError(line, f"los must be 1, 0 or NA, got {text!r}")
            labels.append(pd.NA if _LOS_TEXT[text] is None else _LOS_TEXT[text])

    return MeasurementSet.from_arrays(
        np.asarray(positions, dtype=float).reshape(-1, 3),
        np.asarray(rss, dtype=float),
        labels if read_labels else None,
    )


# Localization results


def result_to_dict(result: LocalizationResult) -> Dict[str, Any]:
    return {
        "s_hat": list(result.s_hat),
        "sv_hats": [sv.alpha for sv in result.sv_hats],
        "sv_hats_deg": [sv.degrees for sv in result.sv_hats],
        "phi_hat": result.phi_hat.as_array().tolist(),
        "total_residual": result.total_residual,
        "per_sector_residuals": list(result.per_sector_residuals),
        "candidate_count": result.candidate_count,
        "boundaries": list(result.boundaries),
        "diagnostics": dict(result.diagnostics),
    }


def result_from_dict(data: Dict[str, Any]) -> LocalizationResult:
    return LocalizationResult(
        s_hat=tuple(float(v) for v in data["s_hat"]),
        sv_hats=tuple(SupportVectorAngle(a) for a in data["sv_hats"]),
        phi_hat=PropagationParams.from_array(data["phi_hat"]),
        total_residual=float(data["total_residual"]),
        per_sector_residuals=tuple(float(v) for v in data["per_sector_residuals"]),
        candidate_count=int(data["candidate_count"]),
        boundaries=tuple(float(v) for v in data.get("boundaries", ())),
        diagnostics=dict(data.get("diagnostics", {})),
    )


def write_result(path: PathLike, result: LocalizationResult) -> None:
    _write_json(path, result_to_dict(result))


def read_result(path: PathLike) -> LocalizationResult:
    return result_from_dict(_read_json(path))


def write_estimate(path: PathLike, method: str, estimate: Iterable[float], count: int) -> None:
    """Write a baseline estimate as ``{"method", "s_hat", "measurement_count"}``."""
    _write_json(
        path,
        {
            "method": method,
            "s_hat": [float(v) for v in estimate],
            "measurement_count": count,
        },
    )


def write_tensor(path: PathLike, tensor: ErrorTensor) -> None:
    _write_json(path, tensor.to_dict())


# Benchmark records


def load_plan_data(path: PathLike) -> Dict[str, Any]:
    """
    Load and validate a benchmark plan document.

    Raises:
        ValueError: if the plan is invalid
    """
    data = _read_json(path)
    is_valid, error_message = validate_plan_data(data)
    if not is_valid:
        raise ValueError(f"Invalid plan {path}: {error_message}")
    return data


def records_frame(records: Iterable[Any]) -> pd.DataFrame:
    """DataFrame of bench records in the CSV column order."""
    rows = [
        [r.method, r.sweep_value, r.trial_seed, r.rmse_m, r.runtime_ms] for r in records
    ]
    frame = pd.DataFrame(rows, columns=RECORD_COLUMNS)
    return frame.astype(
        {
            "method": object,
            "sweep_value": float,
            "trial_seed": int,
            "rmse_m": float,
            "runtime_ms": float,
        }
    )


def write_records(path: PathLike, records: Iterable[Any]) -> None:
    """Write ``method,sweep_value,trial_seed,rmse_m,runtime_ms`` rows."""
    frame = records_frame(records)
    for column in ("sweep_value", "rmse_m", "runtime_ms"):
        frame[column] = [repr(float(v)) for v in frame[column]]

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, columns=RECORD_COLUMNS)
    logger.info(f"Wrote {len(frame)} bench records to {target}")


def read_records(path: PathLike) -> pd.DataFrame:
    frame = pd.read_csv(
        path,
        dtype={
            "method": str,
            "sweep_value": float,
            "trial_seed": int,
            "rmse_m": float,
            "runtime_ms": float,
        },
        float_precision="round_trip",
    )
    missing = [c for c in RECORD_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path} is missing record columns {missing}")
    return frame[RECORD_COLUMNS]


def write_summary(path: PathLike, summary: pd.DataFrame) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    summary.to_csv(target, index=False, columns=SUMMARY_COLUMNS)


def list_packaged(suffix: str = ".json") -> List[str]:
    """Names of the documents shipped with the package."""
    return sorted(p.name for p in PACKAGE_CONFIG_DIR.glob(f"*{suffix}"))
