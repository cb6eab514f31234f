"""
SegLoc Project - Propagation
Parametric radio-map model, ground-truth channel and seeded measurement synthesis.

Conventions: RSS in dB, base-10 logs, d3 the 3D and d2 the horizontal distance
between receiver and source. The noiseless channel in dB is

    power_db - 10 * eta_k * log10(d3) + 10 * q * (log10(d2) - log10(d3))

so the regression coefficients are a_k = power_db, b_k = -10 eta_k - 10 q and
c_k = 10 q.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config.settings import BUILDING_HEIGHT
from .geometry import Building, EnvironmentMap2D, as_point3, classify_los

# Horizontal distance floor (meters) applied before taking logs
D2_FLOOR = 1e-3

# Building vertices of the reference three-building scenario
DEFAULT_MAP_SIZE = 200.0
DEFAULT_AERIAL_HEIGHT = 20.0
DEFAULT_BUILDING_VERTICES = (
    ((10.0, 40.0), (40.0, 20.0), (30.0, 70.0), (60.0, 30.0)),
    ((80.0, -40.0), (20.0, -80.0), (60.0, -100.0), (100.0, -100.0)),
    ((-50.0, 20.0), (-50.0, -20.0), (-70.0, 10.0), (-70.0, -10.0)),
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationTruth:
    """Ground-truth channel parameters known only to the simulator."""

    power_db: float = 0.0
    eta_los: float = 2.0
    eta_nlos: float = 7.0
    sigma_los: float = 1.0
    sigma_nlos: float = 5.0
    antenna_exponent: float = 5.0

    def __post_init__(self):
        for name in ("power_db", "eta_los", "eta_nlos", "antenna_exponent"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("sigma_los", "sigma_nlos"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be a non-negative number, got {value}")


@dataclass(frozen=True)
class PropagationParams:
    """Regression coefficients phi = [a0, b0, c0, a1, b1, c1]."""

    a0: float = 0.0
    b0: float = 0.0
    c0: float = 0.0
    a1: float = 0.0
    b1: float = 0.0
    c1: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_array())):
            raise ValueError(f"Propagation coefficients must be finite: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.b0, self.c0, self.a1, self.b1, self.c1])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "PropagationParams":
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValueError(f"Expected 6 coefficients, got {len(values)}")
        return cls(*values)

    def branch(self, los: bool) -> Tuple[float, float, float]:
        """Coefficients (a_k, b_k, c_k) of the LOS (k=0) or NLOS (k=1) branch."""
        if los:
            return self.a0, self.b0, self.c0
        return self.a1, self.b1, self.c1


def truth_params(truth: PropagationTruth) -> PropagationParams:
    """Map the ground-truth channel onto the parametric model's coefficients."""
    q = truth.antenna_exponent
    return PropagationParams(
        a0=truth.power_db,
        b0=-10.0 * truth.eta_los - 10.0 * q,
        c0=10.0 * q,
        a1=truth.power_db,
        b1=-10.0 * truth.eta_nlos - 10.0 * q,
        c1=10.0 * q,
    )


def log_distances(source: Any, positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Base-10 logs of the 3D and horizontal distances from ``source``.

    d2 is clamped below by ``D2_FLOOR``; d3 is kept no smaller than the clamped d2.
    """
    src = as_point3(source)
    offsets = np.asarray(positions, dtype=float).reshape(-1, 3) - src
    d2 = np.maximum(np.hypot(offsets[:, 0], offsets[:, 1]), D2_FLOOR)
    d3 = np.maximum(np.sqrt(np.sum(offsets * offsets, axis=1)), d2)
    return np.log10(d3), np.log10(d2)


def model_rss_many(
    params: PropagationParams, source: Any, positions: np.ndarray, los: np.ndarray
) -> np.ndarray:
    """Vectorized parametric model; ``los`` selects the branch per receiver."""
    log_d3, log_d2 = log_distances(source, positions)
    los = np.asarray(los, dtype=bool).reshape(-1)
    a = np.where(los, params.a0, params.a1)
    b = np.where(los, params.b0, params.b1)
    c = np.where(los, params.c0, params.c1)
    return a + b * log_d3 + c * log_d2


def model_rss(params: PropagationParams, source: Any, receiver: Any, los: bool) -> float:
    """RSS in dB predicted by ``a_k + b_k log10(d3) + c_k log10(d2)``."""
    src, rcv = as_point3(source), as_point3(receiver)
    if np.array_equal(src, rcv):
        raise ValueError("Receiver coincides with the source")
    return float(model_rss_many(params, src, rcv[None, :], np.array([los]))[0])


def to_linear_watts(rss_db: Any) -> np.ndarray:
    return np.power(10.0, np.asarray(rss_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class Measurement:
    """One RSS sample y_m taken at position z_m."""

    position: Tuple[float, float, float]
    rss_db: float
    truth_los: Optional[bool] = None

    def __post_init__(self):
        if not math.isfinite(self.rss_db):
            raise ValueError(f"rss_db must be finite, got {self.rss_db}")


class MeasurementSet:
    """
    Ordered collection of measurements backed by a pandas DataFrame with the
    columns ``x, y, z, rss_db, los``; ``los`` uses the nullable boolean dtype.
    """

    COLUMNS = ["x", "y", "z", "rss_db", "los"]

    def __init__(self, frame: pd.DataFrame):
        missing = [c for c in self.COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Measurement frame is missing columns: {missing}")

        frame = frame[self.COLUMNS].reset_index(drop=True).copy()
        for column in ("x", "y", "z", "rss_db"):
            frame[column] = frame[column].astype(float)
        frame["los"] = frame["los"].astype("boolean")

        values = frame[["x", "y", "z", "rss_db"]].to_numpy()
        if not np.all(np.isfinite(values)):
            raise ValueError("Measurement positions and RSS values must be finite")
        self._frame = frame

    @classmethod
    def from_arrays(
        cls,
        positions: Any,
        rss_db: Any,
        truth_los: Optional[Any] = None,
    ) -> "MeasurementSet":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        rss_db = np.asarray(rss_db, dtype=float).reshape(-1)
        if len(rss_db) != len(positions):
            raise ValueError("positions and rss_db must have the same length")
        if truth_los is None:
            los = pd.array([pd.NA] * len(rss_db), dtype="boolean")
        else:
            los = pd.array(list(truth_los), dtype="boolean")
        frame = pd.DataFrame(
            {
                "x": positions[:, 0],
                "y": positions[:, 1],
                "z": positions[:, 2],
                "rss_db": rss_db,
                "los": los,
            }
        )
        return cls(frame)

    @classmethod
    def from_measurements(cls, measurements: Iterable[Measurement]) -> "MeasurementSet":
        rows = list(measurements)
        if not rows:
            return cls.empty()
        return cls.from_arrays(
            [m.position for m in rows],
            [m.rss_db for m in rows],
            [pd.NA if m.truth_los is None else m.truth_los for m in rows],
        )

    @classmethod
    def empty(cls) -> "MeasurementSet":
        return cls.from_arrays(np.empty((0, 3)), np.empty(0))

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame.copy()

    @property
    def positions(self) -> np.ndarray:
        return self._frame[["x", "y", "z"]].to_numpy(dtype=float)

    @property
    def rss_db(self) -> np.ndarray:
        return self._frame["rss_db"].to_numpy(dtype=float)

    @property
    def has_truth(self) -> bool:
        return bool(len(self) > 0 and not self._frame["los"].isna().any())

    @property
    def truth_los(self) -> Optional[np.ndarray]:
        """Ground-truth LOS flags, or None when any label is withheld."""
        if not self.has_truth:
            return None
        return self._frame["los"].to_numpy(dtype=bool)

    def without_truth(self) -> "MeasurementSet":
        frame = self.frame
        frame["los"] = pd.array([pd.NA] * len(frame), dtype="boolean")
        return MeasurementSet(frame)

    def subset(self, indices: Any) -> "MeasurementSet":
        return MeasurementSet(self._frame.iloc[np.asarray(indices, dtype=int)])

    def __len__(self) -> int:
        return len(self._frame)

    def __iter__(self) -> Iterator[Measurement]:
        for row in self._frame.itertuples(index=False):
            yield Measurement(
                position=(row.x, row.y, row.z),
                rss_db=row.rss_db,
                truth_los=None if pd.isna(row.los) else bool(row.los),
            )

    def __repr__(self) -> str:
        return f"MeasurementSet(count={len(self)}, has_truth={self.has_truth})"


@dataclass(frozen=True)
class Scenario:
    """The simulator's world: map, ground source, flight height and channel."""

    map: EnvironmentMap2D
    source: Tuple[float, float, float]
    aerial_height: float
    truth: PropagationTruth

    def __post_init__(self):
        source = as_point3(self.source)
        if source[2] != 0.0:
            raise ValueError(f"The source must be on the ground, got height {source[2]}")
        if not self.map.within_bounds(source):
            raise ValueError(f"Source {tuple(source)} lies outside the map")
        if not self.aerial_height > 0.0:
            raise ValueError(f"aerial_height must be positive, got {self.aerial_height}")
        object.__setattr__(self, "source", tuple(float(v) for v in source))

    @classmethod
    def default(cls, building_height: float = BUILDING_HEIGHT) -> "Scenario":
        """Reference scenario: 200 m square, three buildings, source at the origin."""
        buildings = tuple(
            Building(vertices, building_height) for vertices in DEFAULT_BUILDING_VERTICES
        )
        return cls(
            map=EnvironmentMap2D(DEFAULT_MAP_SIZE, buildings),
            source=(0.0, 0.0, 0.0),
            aerial_height=DEFAULT_AERIAL_HEIGHT,
            truth=PropagationTruth(),
        )

    def with_noise(
        self, sigma_los: Optional[float] = None, sigma_nlos: Optional[float] = None
    ) -> "Scenario":
        truth = self.truth
        if sigma_los is not None:
            truth = replace(truth, sigma_los=float(sigma_los))
        if sigma_nlos is not None:
            truth = replace(truth, sigma_nlos=float(sigma_nlos))
        return replace(self, truth=truth)


def generate_measurements(scenario: Scenario, count: int, seed: int) -> MeasurementSet:
    """
    Draw ``count`` measurements uniformly over the map at the aerial height.

    Measurement ``m`` uses its own generator keyed by ``(seed, m)``, so the set
    is a pure function of its inputs and a larger count extends a smaller one.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")

    half = scenario.map.half_size
    positions = np.empty((count, 3))
    shadowing = np.empty(count)
    for m in range(count):
        rng = np.random.default_rng([seed, m])
        positions[m, :2] = rng.uniform(-half, half, size=2)
        positions[m, 2] = scenario.aerial_height
        shadowing[m] = rng.standard_normal()

    los = np.array([classify_los(scenario.map, scenario.source, p) for p in positions])
    sigma = np.where(los, scenario.truth.sigma_los, scenario.truth.sigma_nlos)
    rss = model_rss_many(truth_params(scenario.truth), scenario.source, positions, los)
    rss = rss + sigma * shadowing

    logger.debug(
        f"Generated {count} measurements (seed {seed}): "
        f"{int(los.sum())} LOS, {int((~los).sum())} NLOS"
    )
    return MeasurementSet.from_arrays(positions, rss, los)
