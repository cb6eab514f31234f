"""
SegLoc Project - Data Validators
Validation functions for scenario documents, benchmark plans and CLI options.
"""

import math
from typing import Any, Dict, Optional, Tuple

MAX_VERTICES = 64
SWEEP_PARAMETERS = ("count", "sigma_los", "sigma_nlos")
BENCH_METHODS = ("segreg", "wcl", "wcl-mod", "wcl-genius")
METHOD_ALIASES = {"wcl_mod": "wcl-mod", "wcl_genius": "wcl-genius"}


def _is_number(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def canonical_method(name: Any) -> Any:
    """Map underscore spellings such as ``wcl_mod`` to the hyphenated method name."""
    return METHOD_ALIASES.get(name, name) if isinstance(name, str) else name


def validate_positive_number(value: Any, field_name: str) -> Tuple[bool, str]:
    """Validate that a field holds a finite number greater than zero."""
    if not _is_number(value):
        return False, f"{field_name} must be a finite number"

    if value <= 0:
        return False, f"{field_name} must be positive"

    return True, ""


def validate_point(value: Any, field_name: str, size: int) -> Tuple[bool, str]:
    """Validate a list of ``size`` finite numbers."""
    if not isinstance(value, (list, tuple)) or len(value) != size:
        return False, f"{field_name} must be a list of {size} numbers"

    if not all(_is_number(v) for v in value):
        return False, f"{field_name} must contain finite numbers only"

    return True, ""


def validate_building_data(data: Any, index: int) -> Tuple[bool, str]:
    """Validate one building entry of a scenario document."""
    if not isinstance(data, dict):
        return False, f"buildings[{index}] must be an object"

    vertices = data.get("vertices")
    if not isinstance(vertices, list) or not 3 <= len(vertices) <= MAX_VERTICES:
        return (
            False,
            f"buildings[{index}].vertices must list between 3 and {MAX_VERTICES} vertices",
        )

    for v_index, vertex in enumerate(vertices):
        is_valid, error = validate_point(
            vertex, f"buildings[{index}].vertices[{v_index}]", 2
        )
        if not is_valid:
            return False, error

    if "height" in data and data["height"] is not None:
        is_valid, error = validate_positive_number(
            data["height"], f"buildings[{index}].height"
        )
        if not is_valid:
            return False, error

    return True, ""


def validate_scenario_data(data: Optional[Dict[str, Any]]) -> Tuple[bool, str]:
    """
    Validates a scenario document (map plus channel parameters).

    Args:
        data: Dictionary parsed from the scenario JSON

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not data:
        return False, "No scenario data provided"

    if not isinstance(data, dict):
        return False, "Scenario must be a JSON object"

    for field in ("L", "buildings", "source", "h"):
        if field not in data:
            return False, f"Missing required field: {field}"

    for field in ("L", "h"):
        is_valid, error = validate_positive_number(data[field], field)
        if not is_valid:
            return False, error

    if not isinstance(data["buildings"], list):
        return False, "buildings must be a list"

    for index, building in enumerate(data["buildings"]):
        is_valid, error = validate_building_data(building, index)
        if not is_valid:
            return False, error

    is_valid, error = validate_point(data["source"], "source", 3)
    if not is_valid:
        return False, error

    if data["source"][2] != 0:
        return False, "source must be on the ground (height 0)"

    for field in ("power_db", "eta_los", "eta_nlos", "antenna_exponent"):
        if field in data and not _is_number(data[field]):
            return False, f"{field} must be a finite number"

    for field in ("sigma_los", "sigma_nlos"):
        if field in data and (not _is_number(data[field]) or data[field] < 0):
            return False, f"{field} must be a non-negative number"

    return True, ""


def validate_grid_options(
    spacing: Any, refine: Any = None, nb: Any = None
) -> Tuple[bool, str]:
    """
    Validates localizer grid options.

    Args:
        spacing: Coarse grid spacing in meters
        refine: Optional fine spacing in meters
        nb: Optional number of support-vector candidates

    Returns:
        Tuple of (is_valid, error_message)
    """
    is_valid, error = validate_positive_number(spacing, "grid spacing")
    if not is_valid:
        return False, error

    if refine is not None:
        is_valid, error = validate_positive_number(refine, "refine spacing")
        if not is_valid:
            return False, error
        if refine >= spacing:
            return False, "refine spacing must be smaller than the grid spacing"

    if nb is not None:
        if not isinstance(nb, int) or isinstance(nb, bool) or nb < 1:
            return False, "nb must be a positive integer"

    return True, ""


def validate_plan_data(data: Optional[Dict[str, Any]]) -> Tuple[bool, str]:
    """
    Validates a benchmark plan document.

    Args:
        data: Dictionary parsed from the plan JSON

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not data:
        return False, "No plan data provided"

    if not isinstance(data, dict):
        return False, "Plan must be a JSON object"

    for field in ("sweep", "values", "methods"):
        if field not in data:
            return False, f"Missing required field: {field}"

    if data["sweep"] not in SWEEP_PARAMETERS:
        return False, f"sweep must be one of {', '.join(SWEEP_PARAMETERS)}"

    values = data["values"]
    if not isinstance(values, list) or not values:
        return False, "values must be a non-empty list"

    if not all(_is_number(v) for v in values):
        return False, "values must contain finite numbers only"

    if data["sweep"] == "count" and not all(
        float(v).is_integer() and v >= 1 for v in values
    ):
        return False, "measurement counts must be positive integers"

    if data["sweep"] != "count" and any(v < 0 for v in values):
        return False, "shadowing values must be non-negative"

    methods = data["methods"]
    if not isinstance(methods, list) or not methods:
        return False, "methods must be a non-empty list"

    for method in methods:
        if canonical_method(method) not in BENCH_METHODS:
            return False, f"Unknown method: {method}"

    if "trials" in data:
        trials = data["trials"]
        if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
            return False, "trials must be a positive integer"

    if "count" in data:
        count = data["count"]
        if not isinstance(count, int) or isinstance(count, bool) or count < 1:
            return False, "count must be a positive integer"

    grid = data.get("grid", {})
    if not isinstance(grid, dict):
        return False, "grid must be an object"

    if grid:
        is_valid, error = validate_grid_options(
            grid.get("spacing", 5.0), grid.get("refine"), grid.get("nb")
        )
        if not is_valid:
            return False, error

    if "scenario" in data:
        is_valid, error = validate_scenario_data(data["scenario"])
        if not is_valid:
            return False, f"scenario: {error}"

    return True, ""
