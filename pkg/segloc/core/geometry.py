"""
SegLoc Project - Geometry
2D building maps, 3D line-of-sight occlusion and azimuthal sectorization.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

TWO_PI = 2.0 * math.pi

logger = logging.getLogger(__name__)


class AnchorInsideBuildingError(ValueError):
    """Raised when a presumed source lies strictly inside a building footprint."""

    def __init__(self, anchor: Sequence[float], building_index: int):
        self.anchor = tuple(float(v) for v in anchor)
        self.building_index = building_index
        super().__init__(
            f"Anchor {self.anchor} lies inside building {building_index}"
        )


def as_point3(point: Any) -> np.ndarray:
    """Coerce a 3-sequence into a float array, rejecting other shapes."""
    arr = np.asarray(point, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"Expected a 3D point (x, y, z), got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Building:
    """
    An extruded convex block.

    The footprint is normalized to the convex hull of the given vertices in
    counter-clockwise order. ``height`` is ``None`` in footprint-only views.
    """

    footprint: Tuple[Tuple[float, float], ...]
    height: Optional[float] = None

    def __post_init__(self):
        points = np.asarray(self.footprint, dtype=float)
        if points.ndim != 2 or points.shape[1] != 2 or len(points) < 3:
            raise ValueError("A building footprint needs at least 3 (x, y) vertices")
        try:
            hull = ConvexHull(points)
        except QhullError as e:
            raise ValueError(f"Degenerate building footprint: {e}") from e

        # scipy returns 2D hull vertices counter-clockwise
        ordered = tuple((float(x), float(y)) for x, y in points[hull.vertices])
        object.__setattr__(self, "footprint", ordered)

        if self.height is not None:
            height = float(self.height)
            if not height > 0.0 or not math.isfinite(height):
                raise ValueError(f"Building height must be positive, got {self.height}")
            object.__setattr__(self, "height", height)

    @property
    def vertices(self) -> np.ndarray:
        return np.asarray(self.footprint, dtype=float)

    def contains_strictly(self, point: Sequence[float]) -> bool:
        """True when the 2D point lies in the open interior of the footprint."""
        px, py = float(point[0]), float(point[1])
        n = len(self.footprint)
        for i in range(n):
            ax, ay = self.footprint[i]
            bx, by = self.footprint[(i + 1) % n]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) <= 0.0:
                return False
        return True


def _interiors_overlap(first: Building, second: Building) -> bool:
    """Separating-axis test on edge normals; touching boundaries do not count."""
    a, b = first.vertices, second.vertices
    for poly in (a, b):
        edges = np.roll(poly, -1, axis=0) - poly
        normals = np.column_stack((-edges[:, 1], edges[:, 0]))
        for normal in normals:
            pa, pb = a @ normal, b @ normal
            if min(pa.max(), pb.max()) <= max(pa.min(), pb.min()):
                return False
    return True


@dataclass(frozen=True)
class EnvironmentMap2D:
    """Buildings inside the square ``[-size/2, size/2]²`` (meters)."""

    size: float
    buildings: Tuple[Building, ...] = ()

    def __post_init__(self):
        if not self.size > 0.0:
            raise ValueError(f"Map size must be positive, got {self.size}")
        object.__setattr__(self, "buildings", tuple(self.buildings))

        half = self.half_size + 1e-9
        for idx, building in enumerate(self.buildings):
            if np.any(np.abs(building.vertices) > half):
                raise ValueError(f"Building {idx} extends outside the map bounds")

        for i in range(len(self.buildings)):
            for j in range(i + 1, len(self.buildings)):
                if _interiors_overlap(self.buildings[i], self.buildings[j]):
                    raise ValueError(f"Buildings {i} and {j} overlap")

    @property
    def half_size(self) -> float:
        return self.size / 2.0

    def footprints_only(self) -> "EnvironmentMap2D":
        """The height-free view of the map that the localizer is allowed to see."""
        return replace(
            self, buildings=tuple(Building(b.footprint) for b in self.buildings)
        )

    def within_bounds(self, point: Sequence[float]) -> bool:
        half = self.half_size + 1e-9
        return abs(float(point[0])) <= half and abs(float(point[1])) <= half

    def contains_strictly(self, point: Sequence[float]) -> Optional[int]:
        """Index of the building whose interior holds the point, if any."""
        for idx, building in enumerate(self.buildings):
            if building.contains_strictly(point):
                return idx
        return None


def clip_segment(
    polygon: np.ndarray, start: Sequence[float], direction: Sequence[float]
) -> Optional[Tuple[float, float]]:
    """
    Clip the 2D segment ``start + t * direction``, t in [0, 1], against a convex
    counter-clockwise polygon.

    Returns:
        The parametric interval ``(t0, t1)`` whose open part lies in the polygon
        interior, or None when the segment misses the interior.
    """
    sx, sy = float(start[0]), float(start[1])
    dx, dy = float(direction[0]), float(direction[1])
    t0, t1 = 0.0, 1.0
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        # Inward normal of a counter-clockwise edge
        nx, ny = -(by - ay), bx - ax
        num = nx * (sx - ax) + ny * (sy - ay)
        den = nx * dx + ny * dy
        if den == 0.0:
            if num <= 0.0:
                return None
            continue
        t = -num / den
        if den > 0.0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 >= t1:
            return None
    return t0, t1


def classify_los(env_map: EnvironmentMap2D, source: Any, receiver: Any) -> bool:
    """
    Ground-truth LOS oracle.

    The link is NLOS when the 3D segment source -> receiver passes strictly
    below the roof of some building over the part of its 2D projection that
    crosses the footprint interior.

    Returns:
        True for LOS, False for NLOS
    """
    src = as_point3(source)
    delta = as_point3(receiver) - src
    if not np.any(delta):
        raise ValueError("Degenerate segment: source and receiver coincide")

    for building in env_map.buildings:
        if building.height is None:
            raise ValueError("classify_los needs building heights; got a footprint-only map")

        span = clip_segment(building.footprint, src[:2], delta[:2])
        if span is None:
            continue

        # Height is linear in t, so the lower end of the span decides
        t0, t1 = span
        lowest = min(src[2] + t0 * delta[2], src[2] + t1 * delta[2])
        if lowest < building.height:
            return False
    return True


def footprint_clear(
    env_map: EnvironmentMap2D, anchor: Any, positions: np.ndarray
) -> np.ndarray:
    """
    Receivers whose horizontal segment from ``anchor`` misses every footprint
    interior, vectorized over an (M, 3) position array.

    Such links are LOS whatever the building heights, so only footprints are
    read. This is the complement of the crossing test in :func:`classify_los`.
    """
    point = as_point3(anchor)
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    direction = positions[:, :2] - point[:2]
    clear = np.ones(len(positions), dtype=bool)

    for building in env_map.buildings:
        polygon = building.vertices
        t0 = np.zeros(len(positions))
        t1 = np.ones(len(positions))
        crossing = np.ones(len(positions), dtype=bool)
        for a, b in zip(polygon, np.roll(polygon, -1, axis=0)):
            # Inward normal of a counter-clockwise edge
            normal = np.array([-(b[1] - a[1]), b[0] - a[0]])
            num = float(normal @ (point[:2] - a))
            den = direction @ normal
            parallel = den == 0.0
            if num <= 0.0:
                crossing &= ~parallel
            t = -num / np.where(parallel, 1.0, den)
            t0 = np.where(den > 0.0, np.maximum(t0, t), t0)
            t1 = np.where(den < 0.0, np.minimum(t1, t), t1)
        clear &= ~(crossing & (t0 < t1))
    return clear


def azimuth(anchor: Any, target: Any) -> float:
    """
    Planar polar angle of ``target - anchor`` in [0, 2π), ignoring height.

    A zero horizontal offset maps to 0, so such targets fall in the sector
    containing angle 0.
    """
    a, t = as_point3(anchor), as_point3(target)
    return float(azimuths(a, t[None, :])[0])


def azimuths(anchor: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Vectorized :func:`azimuth` over an (M, 3) or (M, 2) position array."""
    positions = np.asarray(positions, dtype=float)
    dx = positions[:, 0] - anchor[0]
    dy = positions[:, 1] - anchor[1]
    angles = np.mod(np.arctan2(dy, dx), TWO_PI)
    angles[(dx == 0.0) & (dy == 0.0)] = 0.0
    # np.mod can round tiny negatives up to exactly 2π
    angles[angles >= TWO_PI] = 0.0
    return angles


def building_interval(building: Building, anchor: Sequence[float]) -> Tuple[float, float]:
    """
    Azimuth interval subtended by a footprint as seen from ``anchor``.

    Returns:
        ``(start, end)`` with start in [0, 2π) and end >= start; the interval is
        the complement of the widest gap between consecutive vertex azimuths.
    """
    offsets = building.vertices - np.asarray(anchor[:2], dtype=float)
    keep = np.any(offsets != 0.0, axis=1)
    angles = np.sort(np.mod(np.arctan2(offsets[keep, 1], offsets[keep, 0]), TWO_PI))
    gaps = np.diff(np.append(angles, angles[0] + TWO_PI))
    k = int(np.argmax(gaps))
    start = float(angles[(k + 1) % len(angles)])
    return start, start + TWO_PI - float(gaps[k])


def merge_intervals(intervals: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    """Merge circular azimuth intervals ``(start, end)``, handling wrap-around."""
    if not intervals:
        return []

    merged: List[List[float]] = []
    for start, end in sorted(intervals):
        if end - start >= TWO_PI:
            return [(0.0, TWO_PI)]
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])

    # The last interval may run past 2π into the first ones
    while len(merged) > 1 and merged[-1][1] >= merged[0][0] + TWO_PI:
        first = merged.pop(0)
        merged[-1][1] = max(merged[-1][1], first[1] + TWO_PI)

    if merged[0][1] - merged[0][0] >= TWO_PI:
        return [(0.0, TWO_PI)]
    return [(s, e) for s, e in merged]


@dataclass(frozen=True, eq=False)
class Sectorization:
    """
    Azimuthal partition of measurements around a presumed source.

    Sector ``j`` spans ``[boundaries[j], boundaries[j + 1])``; the last sector
    wraps through 2π back to ``boundaries[0]``.

    ``clear`` flags the measurements that no footprint hides from the anchor.
    """

    anchor: Tuple[float, float, float]
    boundaries: Tuple[float, ...]
    assignments: Tuple[np.ndarray, ...]
    clear: Optional[np.ndarray] = None

    @property
    def J(self) -> int:
        return len(self.boundaries)

    def sector_of(self, angle: float) -> int:
        return int(_sector_indices(np.asarray(self.boundaries), np.array([angle]))[0])

    def labels(self, count: int) -> np.ndarray:
        """Sector index of every measurement, as one array of length ``count``."""
        out = np.empty(count, dtype=int)
        for j, members in enumerate(self.assignments):
            out[members] = j
        return out


def _sector_indices(boundaries: np.ndarray, angles: np.ndarray) -> np.ndarray:
    return (np.searchsorted(boundaries, angles, side="right") - 1) % len(boundaries)


def sector_boundaries(env_map: EnvironmentMap2D, anchor: Any) -> Tuple[float, ...]:
    """Sector boundaries at the gap midpoints between merged building intervals."""
    point = as_point3(anchor)
    inside = env_map.contains_strictly(point)
    if inside is not None:
        raise AnchorInsideBuildingError(point, inside)

    if not env_map.buildings:
        return (0.0,)

    merged = merge_intervals([building_interval(b, point) for b in env_map.buildings])
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI:
        return (0.0,)

    boundaries = []
    for idx, (_, end) in enumerate(merged):
        next_start = merged[(idx + 1) % len(merged)][0]
        if idx == len(merged) - 1:
            next_start += TWO_PI
        boundaries.append(math.fmod(0.5 * (end + next_start), TWO_PI))
    return tuple(sorted(boundaries))


def sectorize(env_map: EnvironmentMap2D, anchor: Any, measurements: Any) -> Sectorization:
    """
    Partition measurements into one sector per merged building interval.

    Args:
        env_map: Map whose footprints define the sectors (heights unused)
        anchor: Presumed source location
        measurements: A MeasurementSet or an (M, 3) array of positions

    Raises:
        AnchorInsideBuildingError: if the anchor lies inside a footprint
    """
    point = as_point3(anchor)
    boundaries = sector_boundaries(env_map, point)

    positions = np.asarray(getattr(measurements, "positions", measurements), dtype=float)
    positions = positions.reshape(-1, 3)
    indices = _sector_indices(np.asarray(boundaries), azimuths(point, positions))
    assignments = tuple(np.flatnonzero(indices == j) for j in range(len(boundaries)))

    return Sectorization(
        anchor=(float(point[0]), float(point[1]), float(point[2])),
        boundaries=boundaries,
        assignments=assignments,
        clear=footprint_clear(env_map, point, positions),
    )
