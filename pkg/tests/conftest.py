"""
SegLoc Project - Test Configuration
Pytest configuration and fixtures for testing.
"""

import os

# Settings are read at import time
os.environ.setdefault("SEGLOC_ENV", "testing")

import json  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from segloc.core.geometry import Building, EnvironmentMap2D  # noqa: E402
from segloc.core.localizer import GridSpec  # noqa: E402
from segloc.core.propagation import (  # noqa: E402
    PropagationTruth,
    Scenario,
    generate_measurements,
)
from segloc.core.segreg import default_sv_candidates  # noqa: E402


@pytest.fixture(scope="session")
def default_scenario():
    """Reference scenario: 200 m square, three 50 m buildings, source at the origin."""
    return Scenario.default()


@pytest.fixture(scope="session")
def noiseless_scenario(default_scenario):
    """Reference scenario without shadowing."""
    return default_scenario.with_noise(sigma_los=0.0, sigma_nlos=0.0)


@pytest.fixture(scope="session")
def empty_map():
    """A 100 m square without buildings."""
    return EnvironmentMap2D(100.0)


@pytest.fixture(scope="session")
def empty_scenario(empty_map):
    """Noiseless scenario over the empty map with the source on the 5 m grid."""
    return Scenario(
        map=empty_map,
        source=(10.0, -15.0, 0.0),
        aerial_height=20.0,
        truth=PropagationTruth(sigma_los=0.0, sigma_nlos=0.0),
    )


@pytest.fixture(scope="session")
def sample_measurements(default_scenario):
    """200 measurements of the reference scenario, seed 0."""
    return generate_measurements(default_scenario, 200, seed=0)


@pytest.fixture
def small_grid(default_scenario):
    """A coarse grid around the origin, quick enough for unit tests."""
    return GridSpec(
        spacing=10.0,
        bounds=(-30.0, 30.0, -30.0, 30.0),
        sv_candidates=default_sv_candidates(11),
    )


@pytest.fixture
def square_building():
    """A 20 m square block centred at (50, 0)."""
    return Building(((40.0, -10.0), (60.0, -10.0), (60.0, 10.0), (40.0, 10.0)), 30.0)


@pytest.fixture
def scenario_document():
    """Scenario JSON document with one building and explicit channel values."""
    return {
        "L": 200.0,
        "h": 20.0,
        "source": [0.0, 0.0, 0.0],
        "buildings": [
            {
                "vertices": [[40.0, -10.0], [60.0, -10.0], [60.0, 10.0], [40.0, 10.0]],
                "height": 30.0,
            }
        ],
        "power_db": 0.0,
        "eta_los": 2.0,
        "eta_nlos": 7.0,
        "sigma_los": 1.0,
        "sigma_nlos": 5.0,
        "antenna_exponent": 5.0,
    }


@pytest.fixture
def plan_document():
    """A small WCL-only plan that runs in well under a second."""
    return {
        "sweep": "count",
        "values": [20, 40],
        "methods": ["wcl", "wcl-mod"],
        "trials": 3,
        "seed": 11,
        "timing": False,
    }


@pytest.fixture
def write_json(tmp_path):
    """Write a document into the test's temporary directory and return the path."""

    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def rng():
    """Seeded generator for property loops."""
    return np.random.default_rng(20240501)


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: mark test as a unit test")
    config.addinivalue_line("markers", "integration: mark test as an integration test")
    config.addinivalue_line("markers", "slow: mark test as slow running")


def pytest_collection_modifyitems(config, items):
    """Automatically mark tests based on their location."""
    for item in items:
        # Mark integration tests
        if "integration" in str(item.fspath):
            item.add_marker(pytest.mark.integration)

        # Mark unit tests (default)
        if not any(
            marker.name in ["integration", "slow"] for marker in item.iter_markers()
        ):
            item.add_marker(pytest.mark.unit)
