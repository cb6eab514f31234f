"""
SegLoc Project - Configuration Module
Centralized configuration settings for the SegLoc project.
"""

from .settings import (
    LOG_LEVEL,
    WORKERS,
    GRID_SPACING,
    REFINE_SPACING,
    SV_CANDIDATES,
    BENCH_TRIALS,
    BENCH_SEED,
    BUILDING_HEIGHT,
    PACKAGE_CONFIG_DIR,
)

__all__ = [
    "LOG_LEVEL",
    "WORKERS",
    "GRID_SPACING",
    "REFINE_SPACING",
    "SV_CANDIDATES",
    "BENCH_TRIALS",
    "BENCH_SEED",
    "BUILDING_HEIGHT",
    "PACKAGE_CONFIG_DIR",
]
