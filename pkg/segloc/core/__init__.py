"""
SegLoc Project - Core Module
Map geometry, propagation model, segmented regression, localizer, baselines
and input validators.
"""

from .baselines import WCL_METHODS, WclConfig, wcl
from .geometry import (
    AnchorInsideBuildingError,
    Building,
    EnvironmentMap2D,
    Sectorization,
    classify_los,
    sectorize,
)
from .localizer import (
    GridSpec,
    LocalizationResult,
    NoAdmissibleCandidateError,
    localize,
    refit_global,
)
from .propagation import (
    MeasurementSet,
    PropagationParams,
    PropagationTruth,
    Scenario,
    generate_measurements,
    model_rss,
)
from .segreg import SupportVectorAngle, build_design, solve_ls
from .validators import (
    validate_grid_options,
    validate_plan_data,
    validate_scenario_data,
)

__all__ = [
    "AnchorInsideBuildingError",
    "Building",
    "EnvironmentMap2D",
    "GridSpec",
    "LocalizationResult",
    "MeasurementSet",
    "NoAdmissibleCandidateError",
    "PropagationParams",
    "PropagationTruth",
    "Scenario",
    "Sectorization",
    "SupportVectorAngle",
    "WCL_METHODS",
    "WclConfig",
    "build_design",
    "classify_los",
    "generate_measurements",
    "localize",
    "model_rss",
    "refit_global",
    "sectorize",
    "solve_ls",
    "validate_grid_options",
    "validate_plan_data",
    "validate_scenario_data",
    "wcl",
]
