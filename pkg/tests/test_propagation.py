"""
Tests for the propagation module.
"""

import math

import numpy as np
import pandas as pd
import pytest

from segloc.core.geometry import EnvironmentMap2D, classify_los
from segloc.core.propagation import (
    D2_FLOOR,
    Measurement,
    MeasurementSet,
    PropagationParams,
    PropagationTruth,
    Scenario,
    generate_measurements,
    log_distances,
    model_rss,
    model_rss_many,
    to_linear_watts,
    truth_params,
)


class TestTruthParams:
    """Tests for the truth-to-coefficient mapping."""

    def test_los_branch(self):
        """P = 1 W, eta = 2, q = 5 gives (0, -70, 50)."""
        params = truth_params(PropagationTruth())
        assert params.branch(True) == (0.0, -70.0, 50.0)

    def test_nlos_branch(self):
        """eta = 7 gives (0, -120, 50)."""
        params = truth_params(PropagationTruth())
        assert params.branch(False) == (0.0, -120.0, 50.0)

    def test_gainless_lossless(self):
        """q = 0 and eta = 0 give zero coefficients."""
        params = truth_params(PropagationTruth(eta_los=0.0, antenna_exponent=0.0))
        assert params.branch(True) == (0.0, 0.0, 0.0)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            PropagationTruth(sigma_los=-1.0)


class TestPropagationParams:
    """Tests for the coefficient container."""

    def test_array_round_trip(self):
        params = PropagationParams(1, 2, 3, 4, 5, 6)
        assert PropagationParams.from_array(params.as_array()) == params

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            PropagationParams.from_array([1, 2, 3])

    def test_non_finite(self):
        with pytest.raises(ValueError):
            PropagationParams(a0=float("nan"))


class TestModelRss:
    """Tests for the parametric model."""

    def test_unit_distances(self):
        """Logs vanish at d2 = d3 = 1."""
        params = PropagationParams(a0=0.0, b0=-70.0, c0=50.0)
        assert model_rss(params, (0, 0, 0), (1, 0, 0), los=True) == 0.0

    def test_zero_params(self, rng):
        """All-zero coefficients give 0 dB anywhere."""
        for _ in range(100):
            receiver = (*rng.uniform(-100, 100, 2), rng.uniform(1, 50))
            assert model_rss(PropagationParams(), (0, 0, 0), receiver, bool(rng.integers(2))) == 0.0

    def test_reference_receiver(self):
        """Closed-form value at (100, 0, 20)."""
        params = truth_params(PropagationTruth())
        d3 = math.sqrt(100.0**2 + 20.0**2)
        expected = -70.0 * math.log10(d3) + 50.0 * math.log10(100.0)
        assert model_rss(params, (0, 0, 0), (100, 0, 20), los=True) == pytest.approx(
            expected, rel=1e-12
        )

    def test_receiver_at_source(self):
        with pytest.raises(ValueError):
            model_rss(PropagationParams(), (0, 0, 0), (0, 0, 0), los=True)

    def test_d2_clamped_above_source(self):
        """Directly above the source the horizontal distance is floored."""
        log_d3, log_d2 = log_distances((0, 0, 0), np.array([[0.0, 0.0, 20.0]]))
        assert log_d2[0] == pytest.approx(math.log10(D2_FLOOR))
        assert log_d3[0] == pytest.approx(math.log10(20.0))

    def test_linear_consistency(self, rng):
        """10^(rss/10) matches P * d3^-eta * (d2/d3)^q for random geometry."""
        for _ in range(200):
            truth = PropagationTruth(
                power_db=rng.uniform(-10, 10),
                eta_los=rng.uniform(1.5, 4),
                eta_nlos=rng.uniform(4, 8),
                antenna_exponent=rng.uniform(0, 6),
            )
            params = truth_params(truth)
            source = (*rng.uniform(-50, 50, 2), 0.0)
            receiver = (*rng.uniform(-100, 100, 2), rng.uniform(1, 60))
            los = bool(rng.integers(2))
            d2 = math.hypot(receiver[0] - source[0], receiver[1] - source[1])
            d3 = math.sqrt(d2**2 + receiver[2] ** 2)
            eta = truth.eta_los if los else truth.eta_nlos
            watts = 10 ** (truth.power_db / 10) * d3 ** (-eta) * (d2 / d3) ** truth.antenna_exponent
            value = to_linear_watts(model_rss(params, source, receiver, los))
            assert value == pytest.approx(watts, rel=1e-10)

    def test_vectorized_matches_scalar(self, rng):
        params = truth_params(PropagationTruth())
        positions = np.column_stack((rng.uniform(-100, 100, (50, 2)), np.full(50, 20.0)))
        los = rng.integers(0, 2, 50).astype(bool)
        many = model_rss_many(params, (0, 0, 0), positions, los)
        for p, flag, value in zip(positions, los, many):
            assert model_rss(params, (0, 0, 0), p, bool(flag)) == pytest.approx(value, rel=1e-14)

    def test_linear_conversion(self):
        np.testing.assert_allclose(to_linear_watts([-30.0, 0.0, 10.0]), [1e-3, 1.0, 10.0])


class TestMeasurementSet:
    """Tests for the DataFrame-backed measurement collection."""

    def test_from_measurements(self):
        rows = [
            Measurement((1.0, 2.0, 20.0), -50.5, True),
            Measurement((3.0, 4.0, 20.0), -60.0, None),
        ]
        measurements = MeasurementSet.from_measurements(rows)
        assert len(measurements) == 2
        assert list(measurements) == rows
        assert measurements.truth_los is None

    def test_nullable_los_dtype(self, sample_measurements):
        assert sample_measurements.frame["los"].dtype == pd.BooleanDtype()
        assert sample_measurements.has_truth

    def test_without_truth(self, sample_measurements):
        blind = sample_measurements.without_truth()
        assert blind.truth_los is None
        np.testing.assert_array_equal(blind.rss_db, sample_measurements.rss_db)

    def test_subset(self, sample_measurements):
        part = sample_measurements.subset([3, 1])
        np.testing.assert_array_equal(part.positions, sample_measurements.positions[[3, 1]])

    def test_empty(self):
        empty = MeasurementSet.empty()
        assert len(empty) == 0
        assert empty.positions.shape == (0, 3)
        assert not empty.has_truth

    def test_non_finite_rss_rejected(self):
        with pytest.raises(ValueError):
            MeasurementSet.from_arrays([[0, 0, 20]], [float("inf")])

    def test_missing_columns(self):
        with pytest.raises(ValueError, match="missing"):
            MeasurementSet(pd.DataFrame({"x": [1.0]}))


class TestScenario:
    """Tests for scenario construction."""

    def test_default_matches_reference(self, default_scenario):
        assert default_scenario.map.size == 200.0
        assert default_scenario.aerial_height == 20.0
        assert default_scenario.source == (0.0, 0.0, 0.0)
        assert len(default_scenario.map.buildings) == 3
        assert all(b.height == 50.0 for b in default_scenario.map.buildings)

    def test_source_must_be_on_ground(self, empty_map):
        with pytest.raises(ValueError, match="ground"):
            Scenario(empty_map, (0, 0, 1), 20.0, PropagationTruth())

    def test_source_inside_bounds(self, empty_map):
        with pytest.raises(ValueError, match="outside"):
            Scenario(empty_map, (80, 0, 0), 20.0, PropagationTruth())

    def test_with_noise(self, default_scenario):
        noisy = default_scenario.with_noise(sigma_nlos=7.0)
        assert noisy.truth.sigma_nlos == 7.0
        assert noisy.truth.sigma_los == default_scenario.truth.sigma_los


class TestGenerateMeasurements:
    """Tests for seeded measurement synthesis."""

    def test_noiseless_equals_model(self, noiseless_scenario):
        measurements = generate_measurements(noiseless_scenario, 100, seed=3)
        expected = model_rss_many(
            truth_params(noiseless_scenario.truth),
            noiseless_scenario.source,
            measurements.positions,
            measurements.truth_los,
        )
        np.testing.assert_array_equal(measurements.rss_db, expected)

    def test_same_seed_identical(self, default_scenario):
        first = generate_measurements(default_scenario, 50, seed=9)
        second = generate_measurements(default_scenario, 50, seed=9)
        pd.testing.assert_frame_equal(first.frame, second.frame)

    def test_different_seed_differs(self, default_scenario):
        first = generate_measurements(default_scenario, 50, seed=1)
        second = generate_measurements(default_scenario, 50, seed=2)
        assert not np.array_equal(first.positions, second.positions)

    def test_larger_count_extends_smaller(self, default_scenario):
        """Per-index streams make a prefix independent of the total count."""
        small = generate_measurements(default_scenario, 30, seed=4)
        large = generate_measurements(default_scenario, 60, seed=4)
        pd.testing.assert_frame_equal(small.frame, large.subset(range(30)).frame)

    def test_positions_uniform_in_area(self, default_scenario):
        measurements = generate_measurements(default_scenario, 500, seed=5)
        positions = measurements.positions
        assert np.all(np.abs(positions[:, :2]) <= 100.0)
        assert np.all(positions[:, 2] == 20.0)

    def test_labels_from_oracle(self, default_scenario, sample_measurements):
        for m in list(sample_measurements)[:40]:
            assert m.truth_los == classify_los(default_scenario.map, (0, 0, 0), m.position)

    def test_los_shadowing_mean(self, default_scenario, sample_measurements):
        """LOS residuals average to 0 within three standard errors."""
        los = sample_measurements.truth_los
        model = model_rss_many(
            truth_params(default_scenario.truth),
            default_scenario.source,
            sample_measurements.positions,
            los,
        )
        residual = (sample_measurements.rss_db - model)[los]
        bound = 3.0 * default_scenario.truth.sigma_los / math.sqrt(len(residual))
        assert abs(residual.mean()) <= bound

    def test_invalid_count(self, default_scenario):
        with pytest.raises(ValueError):
            generate_measurements(default_scenario, 0, seed=1)

    def test_empty_map_all_los(self, empty_scenario):
        measurements = generate_measurements(empty_scenario, 40, seed=1)
        assert measurements.truth_los.all()

    def test_map_without_buildings(self):
        scenario = Scenario(EnvironmentMap2D(50.0), (0, 0, 0), 10.0, PropagationTruth())
        assert len(generate_measurements(scenario, 5, seed=0)) == 5
