"""
Tests for the segmented regression module.
"""

import math

import numpy as np
import pytest

from segloc.core.propagation import MeasurementSet, PropagationParams, model_rss_many
from segloc.core.segreg import (
    HALF_PI,
    DesignRow,
    SectorData,
    SupportVectorAngle,
    best_support_vector,
    build_design,
    default_sv_candidates,
    design_matrix,
    indicator,
    indicators,
    sector_residual,
    sector_scan,
    solve_ls,
)

TRUE_PHI = PropagationParams(0.0, -70.0, 50.0, 0.0, -120.0, 50.0)


def random_sector(rng, count, source=(0.0, 0.0, 0.0)):
    """Receivers at random heights around the source with random RSS."""
    positions = np.column_stack(
        (rng.uniform(-100, 100, (count, 2)), rng.uniform(1, 60, count))
    )
    return MeasurementSet.from_arrays(positions, rng.normal(-120, 20, count))


def noiseless_sector(rng, count, sv, source=(0.0, 0.0, 0.0)):
    """Receivers labeled by ``sv`` with RSS from TRUE_PHI."""
    positions = np.column_stack(
        (rng.uniform(-100, 100, (count, 2)), rng.uniform(1, 60, count))
    )
    labels = indicators(positions, source, sv).astype(bool)
    rss = model_rss_many(TRUE_PHI, source, positions, labels)
    return MeasurementSet.from_arrays(positions, rss)


def oracle_design(measurements, source, sv):
    """Row-by-row construction."""
    rows = []
    for m in measurements:
        dx = np.subtract(m.position, source)
        d2 = max(math.hypot(dx[0], dx[1]), 1e-3)
        d3 = max(math.sqrt(dx @ dx), d2)
        u = 1 if math.atan2(dx[2], math.hypot(dx[0], dx[1])) >= sv.alpha else 0
        rows.append(DesignRow(math.log10(d3), math.log10(d2), u).as_vector())
    return np.array(rows).reshape(-1, 6)


class TestSupportVectorAngle:
    """Tests for the critical elevation angle."""

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            SupportVectorAngle(-0.1)
        with pytest.raises(ValueError):
            SupportVectorAngle(HALF_PI + 0.01)

    def test_degrees(self):
        assert SupportVectorAngle.from_degrees(30).degrees == pytest.approx(30.0)
        assert SupportVectorAngle.from_degrees(90).alpha == HALF_PI

    def test_default_candidates(self):
        """31 angles, 3 degrees apart, both endpoints included."""
        candidates = default_sv_candidates()
        assert len(candidates) == 31
        assert candidates[0].alpha == 0.0
        assert candidates[-1].alpha == HALF_PI
        assert candidates[1].degrees == pytest.approx(3.0)

    def test_at_least_one_candidate(self):
        with pytest.raises(ValueError):
            default_sv_candidates(0)


class TestIndicator:
    """Tests for the LOS indicator."""

    def test_zero_angle_all_los(self, rng):
        for _ in range(100):
            receiver = (*rng.uniform(-100, 100, 2), rng.uniform(0.1, 60))
            assert indicator(receiver, (0, 0, 0), SupportVectorAngle(0.0)) == 1

    def test_right_angle_all_nlos(self, rng):
        for _ in range(100):
            receiver = (*rng.uniform(1, 100, 2), rng.uniform(0.1, 60))
            assert indicator(receiver, (0, 0, 0), SupportVectorAngle(HALF_PI)) == 0

    def test_forty_five_degrees(self):
        """Elevation pi/4 is LOS below it and NLOS above it."""
        receiver = (20, 0, 20)
        assert indicator(receiver, (0, 0, 0), SupportVectorAngle(math.pi / 6)) == 1
        assert indicator(receiver, (0, 0, 0), SupportVectorAngle(math.pi / 3)) == 0

    def test_equality_is_los(self):
        assert indicator((20, 0, 20), (0, 0, 0), SupportVectorAngle(math.atan2(20, 20))) == 1

    def test_partition(self, rng):
        """u_los + u_nlos = 1 under every angle."""
        for _ in range(100):
            positions = np.column_stack(
                (rng.uniform(-100, 100, (20, 2)), rng.uniform(1, 60, 20))
            )
            sv = SupportVectorAngle(rng.uniform(0, HALF_PI))
            u = indicators(positions, (0, 0, 0), sv)
            design = design_matrix(np.zeros(20), np.zeros(20), u)
            np.testing.assert_array_equal(design[:, 0] + design[:, 3], np.ones(20))

    def test_independent_of_rss(self, rng):
        """Labels depend on geometry only."""
        for _ in range(100):
            measurements = random_sector(rng, 15)
            shuffled = MeasurementSet.from_arrays(
                measurements.positions, rng.permutation(measurements.rss_db)
            )
            sv = SupportVectorAngle(rng.uniform(0, HALF_PI))
            np.testing.assert_array_equal(
                SectorData.from_measurements(measurements, (0, 0, 0)).labels(sv),
                SectorData.from_measurements(shuffled, (0, 0, 0)).labels(sv),
            )


class TestBuildDesign:
    """Tests for segmented design rows."""

    def test_single_los_row(self):
        measurements = MeasurementSet.from_arrays([[1.0, 0.0, 0.0]], [-10.0])
        design, y = build_design(measurements, (0, 0, 0), SupportVectorAngle(0.0))
        np.testing.assert_array_equal(design, [[1, 0, 0, 0, 0, 0]])
        np.testing.assert_array_equal(y, [-10.0])

    def test_single_nlos_row(self):
        measurements = MeasurementSet.from_arrays([[1.0, 0.0, 0.0]], [-10.0])
        design, _ = build_design(measurements, (0, 0, 0), SupportVectorAngle(0.5))
        np.testing.assert_array_equal(design, [[0, 0, 0, 1, 0, 0]])

    def test_mixed_sector_matches_rowwise_construction(self, rng):
        for _ in range(100):
            measurements = random_sector(rng, 4)
            sv = SupportVectorAngle(rng.uniform(0, HALF_PI))
            design, _ = build_design(measurements, (0, 0, 0), sv)
            np.testing.assert_allclose(
                design, oracle_design(measurements, (0, 0, 0), sv), rtol=1e-14, atol=0
            )

    def test_three_nonzero_entries(self, rng):
        measurements = random_sector(rng, 30)
        design, _ = build_design(measurements, (0, 0, 0), SupportVectorAngle(0.3))
        assert np.all(np.count_nonzero(design, axis=1) == 3)


class TestSolveLs:
    """Tests for minimum-norm least squares."""

    def test_matches_pseudo_inverse(self, rng):
        """Coefficients and residual agree with the SVD pseudo-inverse on random designs."""
        for _ in range(1000):
            n = int(rng.integers(1, 13))
            u = rng.integers(0, 2, n)
            log_d3 = rng.uniform(0, 2.5, n)
            log_d2 = log_d3 - rng.uniform(0, 0.5, n)
            design = design_matrix(log_d3, log_d2, u)
            y = rng.normal(-100, 30, n)

            fit = solve_ls(design, y)
            expected = np.linalg.pinv(design) @ y
            residual = y - design @ expected

            phi = fit.phi.as_array()
            scale = max(1.0, np.linalg.norm(expected))
            assert np.linalg.norm(phi - expected) <= 1e-8 * scale
            assert fit.residual_sq == pytest.approx(
                residual @ residual, rel=1e-8, abs=1e-8 * (y @ y)
            )

    def test_exact_model_recovered(self, rng):
        for _ in range(100):
            sv = SupportVectorAngle(rng.uniform(0.1, 0.6))
            measurements = noiseless_sector(rng, 40, sv)
            design, y = build_design(measurements, (0, 0, 0), sv)
            fit = solve_ls(design, y)
            if fit.n_los >= 6 and fit.n_nlos >= 6:
                np.testing.assert_allclose(
                    fit.phi.as_array(), TRUE_PHI.as_array(), rtol=1e-6, atol=1e-6
                )
            assert fit.residual_sq <= 1e-16 * (y @ y)

    def test_all_los_zeroes_nlos_coefficients(self, rng):
        measurements = random_sector(rng, 20)
        design, y = build_design(measurements, (0, 0, 0), SupportVectorAngle(0.0))
        fit = solve_ls(design, y)
        assert fit.phi.branch(False) == (0.0, 0.0, 0.0)
        assert fit.n_los == 20 and fit.n_nlos == 0

    def test_optimality_against_perturbations(self, rng):
        measurements = random_sector(rng, 25)
        design, y = build_design(measurements, (0, 0, 0), SupportVectorAngle(0.4))
        fit = solve_ls(design, y)
        for _ in range(1000):
            perturbed = fit.phi.as_array() + rng.normal(0, 5, 6)
            r = y - design @ perturbed
            assert fit.residual_sq <= r @ r + 1e-9

    def test_empty_design(self):
        fit = solve_ls(np.zeros((0, 6)), np.zeros(0))
        assert fit.residual_sq == 0.0
        assert fit.phi == PropagationParams()

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            solve_ls(np.zeros((3, 6)), np.zeros(2))


class TestSectorResidual:
    """Tests for per-sector residuals and the angle scan."""

    def test_true_angle_fits_exactly(self, rng):
        for _ in range(100):
            sv = SupportVectorAngle(rng.uniform(0.05, 0.8))
            measurements = noiseless_sector(rng, 30, sv)
            scale = np.sum(measurements.rss_db**2)
            assert sector_residual(measurements, (0, 0, 0), sv) <= 1e-16 * scale

    def test_single_measurement(self):
        measurements = MeasurementSet.from_arrays([[30.0, 40.0, 20.0]], [-90.0])
        assert sector_residual(measurements, (0, 0, 0), SupportVectorAngle(0.3)) == pytest.approx(
            0.0, abs=1e-20
        )

    def test_empty_sector(self):
        assert sector_residual(MeasurementSet.empty(), (0, 0, 0), SupportVectorAngle(0.3)) == 0.0

    def test_wrong_angle_mixes_labels(self):
        """Ten noiseless points split at 45 degrees fit worse with all labels LOS."""
        angles = np.linspace(0.2, 1.3, 10)
        d2 = 20.0 / np.tan(angles)
        positions = np.column_stack((d2, np.zeros(10), np.full(10, 20.0)))
        sv = SupportVectorAngle(math.pi / 4)
        labels = indicators(positions, (0, 0, 0), sv).astype(bool)
        measurements = MeasurementSet.from_arrays(
            positions, model_rss_many(TRUE_PHI, (0, 0, 0), positions, labels)
        )
        assert sector_residual(measurements, (0, 0, 0), sv) < 1e-12
        assert sector_residual(measurements, (0, 0, 0), SupportVectorAngle(0.0)) > 1e-3

    def test_scan_matches_loop(self, rng):
        candidates = default_sv_candidates()
        for _ in range(100):
            measurements = random_sector(rng, int(rng.integers(1, 30)))
            scan = sector_scan(measurements, (0, 0, 0), candidates)
            loop = [sector_residual(measurements, (0, 0, 0), sv) for sv in candidates]
            np.testing.assert_allclose(scan, loop, rtol=1e-12, atol=1e-12)

    def test_clear_receivers_los_under_every_angle(self, rng):
        measurements = random_sector(rng, 20)
        clear = np.arange(20) % 3 == 0
        data = SectorData.from_measurements(measurements, (0, 0, 0), clear)
        for sv in default_sv_candidates(7):
            labels = data.labels(sv).astype(bool)
            assert labels[clear].all()
        np.testing.assert_array_equal(data.labels(SupportVectorAngle(HALF_PI)), clear)

    def test_clear_flags_length_checked(self, rng):
        with pytest.raises(ValueError):
            SectorData.from_measurements(random_sector(rng, 5), (0, 0, 0), np.ones(4))

    def test_shadowed_split_fits_exactly_with_clear_flags(self):
        """
        Noiseless receivers that are NLOS only where a footprint hides them
        fit exactly once the clear ones are pinned to LOS.
        """
        positions = np.column_stack(
            (np.linspace(30.0, 120.0, 12), np.zeros(12), np.full(12, 20.0))
        )
        clear = np.arange(12) % 2 == 0
        measurements = MeasurementSet.from_arrays(
            positions, model_rss_many(TRUE_PHI, (0, 0, 0), positions, clear)
        )
        residual = sector_residual(measurements, (0, 0, 0), SupportVectorAngle(HALF_PI), clear)
        assert residual < 1e-12
        assert sector_residual(measurements, (0, 0, 0), SupportVectorAngle(HALF_PI)) > 1e-3

    def test_identical_labels_identical_fit(self, rng):
        """Angles inducing the same labeling give the same fit."""
        measurements = random_sector(rng, 20)
        data = SectorData.from_measurements(measurements, (0, 0, 0))
        elevation = np.sort(data.elevation)
        low = SupportVectorAngle(elevation[9] + 0.25 * (elevation[10] - elevation[9]))
        high = SupportVectorAngle(elevation[9] + 0.75 * (elevation[10] - elevation[9]))
        np.testing.assert_array_equal(data.labels(low), data.labels(high))
        assert data.fit(data.labels(low)) == data.fit(data.labels(high))


class TestBestSupportVector:
    """Tests for the residual-minimizing angle."""

    def test_single_candidate(self, rng):
        measurements = random_sector(rng, 12)
        sv = SupportVectorAngle(0.7)
        assert best_support_vector(measurements, (0, 0, 0), [sv])[0] == sv

    def test_noiseless_true_angle(self, rng):
        for _ in range(100):
            candidates = default_sv_candidates()
            sv = candidates[int(rng.integers(1, 20))]
            measurements = noiseless_sector(rng, 30, sv)
            best, residual = best_support_vector(measurements, (0, 0, 0), candidates)
            scale = np.sum(measurements.rss_db**2)
            assert residual <= 1e-16 * scale
            assert sector_residual(measurements, (0, 0, 0), best) == pytest.approx(
                residual, abs=1e-16 * scale
            )

    def test_matches_exhaustive_loop(self, rng):
        candidates = default_sv_candidates()
        for _ in range(100):
            measurements = random_sector(rng, 25)
            best, residual = best_support_vector(measurements, (0, 0, 0), candidates)
            residuals = [sector_residual(measurements, (0, 0, 0), sv) for sv in candidates]
            smallest = min(residuals)
            expected = next(
                sv for sv, r in zip(candidates, residuals) if r == smallest
            )
            assert best == expected
            assert residual == smallest

    def test_ties_prefer_smallest_angle(self):
        """A single measurement fits exactly under every angle."""
        measurements = MeasurementSet.from_arrays([[30.0, 40.0, 20.0]], [-90.0])
        best, _ = best_support_vector(measurements, (0, 0, 0), default_sv_candidates())
        assert best.alpha == 0.0

    def test_candidate_monotonicity(self, rng):
        """A larger candidate set never yields a larger residual."""
        full = default_sv_candidates()
        for _ in range(100):
            measurements = random_sector(rng, 20)
            subset = [sv for sv in full if rng.random() < 0.4] or [full[0]]
            _, small = best_support_vector(measurements, (0, 0, 0), subset)
            _, large = best_support_vector(measurements, (0, 0, 0), full)
            assert large <= small

    def test_empty_candidates(self, rng):
        with pytest.raises(ValueError):
            best_support_vector(random_sector(rng, 3), (0, 0, 0), [])
