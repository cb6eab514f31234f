"""
SegLoc Project - Configuration Settings
Centralized configuration for the SegLoc project.
"""

import os
from pathlib import Path

# Packaged scenario and plan documents
PACKAGE_CONFIG_DIR = Path(__file__).parent


class Config:
    """Base configuration class."""

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Parallelism
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    # Localizer search grid
    GRID_SPACING: float = float(os.getenv("GRID_SPACING", "5.0"))  # meters
    REFINE_SPACING: float = float(os.getenv("REFINE_SPACING", "1.0"))  # meters
    SV_CANDIDATES: int = int(os.getenv("SV_CANDIDATES", "31"))

    # Benchmark harness
    BENCH_TRIALS: int = int(os.getenv("BENCH_TRIALS", "50"))
    BENCH_SEED: int = int(os.getenv("BENCH_SEED", "0"))

    # Simulator
    BUILDING_HEIGHT: float = float(os.getenv("BUILDING_HEIGHT", "50.0"))  # meters


class DevelopmentConfig(Config):
    """Development configuration."""

    LOG_LEVEL = os.getenv("LOG_LEVEL", "DEBUG").upper()


class BenchmarkConfig(Config):
    """Configuration for long Monte-Carlo sweeps."""

    WORKERS = int(os.getenv("WORKERS", str(os.cpu_count() or 1)))

    def __init__(self):
        # Ensure numeric settings are usable before a sweep starts
        numeric = {
            "WORKERS": self.WORKERS,
            "GRID_SPACING": self.GRID_SPACING,
            "REFINE_SPACING": self.REFINE_SPACING,
            "SV_CANDIDATES": self.SV_CANDIDATES,
            "BENCH_TRIALS": self.BENCH_TRIALS,
            "BUILDING_HEIGHT": self.BUILDING_HEIGHT,
        }
        for name, value in numeric.items():
            if value <= 0:
                raise ValueError(f"Setting {name} must be positive, got {value}")


class TestingConfig(Config):
    """Testing configuration."""

    LOG_LEVEL = "WARNING"
    WORKERS = 1


def get_config() -> Config:
    """Get configuration based on environment."""
    env = os.getenv("SEGLOC_ENV", "development").lower()

    if env == "benchmark":
        return BenchmarkConfig()
    elif env == "testing":
        return TestingConfig()
    else:
        return DevelopmentConfig()


# Current configuration instance
config = get_config()

# Expose as module-level variables
LOG_LEVEL = config.LOG_LEVEL
WORKERS = config.WORKERS
GRID_SPACING = config.GRID_SPACING
REFINE_SPACING = config.REFINE_SPACING
SV_CANDIDATES = config.SV_CANDIDATES
BENCH_TRIALS = config.BENCH_TRIALS
BENCH_SEED = config.BENCH_SEED
BUILDING_HEIGHT = config.BUILDING_HEIGHT
