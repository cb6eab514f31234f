"""
SegLoc Project - Segmented Regression
Support-vector indicator, segmented design matrices and per-sector least squares.

A support vector is the normal of a plane through the presumed source whose
normal lies in the radial-vertical plane, so it reduces to one critical
elevation angle ``alpha``: a receiver is classified LOS when its elevation seen
from the source is at least ``alpha``.

Inside a sector the angle only has to separate the receivers that some
footprint hides in 2D; receivers flagged clear by the map are LOS under every
angle.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import SV_CANDIDATES
from .geometry import as_point3
from .propagation import PropagationParams, log_distances

HALF_PI = math.pi / 2.0

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class SupportVectorAngle:
    """Critical elevation angle (radians) separating LOS above from NLOS below."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= HALF_PI:
            raise ValueError(f"alpha must lie in [0, pi/2], got {self.alpha}")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def from_degrees(cls, degrees: float) -> "SupportVectorAngle":
        return cls(min(math.radians(degrees), HALF_PI))

    @property
    def degrees(self) -> float:
        return math.degrees(self.alpha)


def default_sv_candidates(nb: int = SV_CANDIDATES) -> Tuple[SupportVectorAngle, ...]:
    """``nb`` evenly spaced angles on [0, pi/2]; the endpoints act as all-LOS / all-NLOS."""
    if nb < 1:
        raise ValueError(f"At least one support-vector candidate is required, got {nb}")
    if nb == 1:
        return (SupportVectorAngle(0.0),)
    return tuple(SupportVectorAngle(a) for a in np.linspace(0.0, HALF_PI, nb))


def elevations(source: Any, positions: np.ndarray) -> np.ndarray:
    """Elevation angle of each receiver as seen from the source."""
    src = as_point3(source)
    offsets = np.asarray(positions, dtype=float).reshape(-1, 3) - src
    return np.arctan2(offsets[:, 2], np.hypot(offsets[:, 0], offsets[:, 1]))


def indicator(receiver: Any, source: Any, sv: SupportVectorAngle) -> int:
    """u_los of one receiver: 1 when its elevation is at least ``sv.alpha``."""
    rcv = as_point3(receiver)
    return int(indicators(rcv[None, :], source, sv)[0])


def indicators(positions: np.ndarray, source: Any, sv: SupportVectorAngle) -> np.ndarray:
    """Vectorized :func:`indicator`; equality is classified LOS."""
    return (elevations(source, positions) >= sv.alpha).astype(np.uint8)


class DesignRow(NamedTuple):
    """One measurement's regressors and LOS indicator."""

    log_d3: float
    log_d2: float
    u_los: int

    @property
    def u_nlos(self) -> int:
        return 1 - self.u_los

    def as_vector(self) -> np.ndarray:
        u, v = self.u_los, self.u_nlos
        return np.array(
            [u, u * self.log_d3, u * self.log_d2, v, v * self.log_d3, v * self.log_d2],
            dtype=float,
        )


def design_matrix(log_d3: np.ndarray, log_d2: np.ndarray, u_los: np.ndarray) -> np.ndarray:
    """
    Rows ``[u0, u0 log d3, u0 log d2, u1, u1 log d3, u1 log d2]`` against
    phi = [a0, b0, c0, a1, b1, c1], with u1 = 1 - u0.
    """
    u0 = np.asarray(u_los, dtype=float).reshape(-1)
    u1 = 1.0 - u0
    return np.column_stack(
        (u0, u0 * log_d3, u0 * log_d2, u1, u1 * log_d3, u1 * log_d2)
    )


@dataclass(frozen=True)
class SectorFit:
    """Least-squares fit of one sector (or of all measurements)."""

    phi: PropagationParams
    residual_sq: float
    n_los: int
    n_nlos: int


def solve_ls(design: Any, y: Any) -> SectorFit:
    """
    Minimum-norm least squares ``min ||y - D phi||²``.

    Columns that are identically zero (an absent LOS or NLOS class) are left
    out of the SVD-based solve and their coefficients are set to exactly 0,
    which is the minimum-norm completion.
    """
    D = np.asarray(design, dtype=float).reshape(-1, 6)
    y = np.asarray(y, dtype=float).reshape(-1)
    if len(y) != len(D):
        raise ValueError(f"Design has {len(D)} rows but y has {len(y)} entries")

    phi = np.zeros(6)
    active = np.any(D != 0.0, axis=0)
    if len(y) and active.any():
        solution, *_ = np.linalg.lstsq(D[:, active], y, rcond=None)
        phi[active] = solution

    residual = y - D @ phi
    n_los = int(np.count_nonzero(D[:, 0]))
    return SectorFit(
        phi=PropagationParams.from_array(phi),
        residual_sq=float(residual @ residual),
        n_los=n_los,
        n_nlos=len(y) - n_los,
    )


def _clear_mask(clear: Optional[np.ndarray], count: int) -> np.ndarray:
    if clear is None:
        return np.zeros(count, dtype=bool)
    mask = np.asarray(clear, dtype=bool).reshape(-1)
    if len(mask) != count:
        raise ValueError(f"Expected {count} clear flags, got {len(mask)}")
    return mask


class SectorData:
    """
    Geometry of one sector's measurements relative to a presumed source,
    computed once and reused across support-vector candidates.
    """

    def __init__(
        self,
        positions: np.ndarray,
        rss_db: np.ndarray,
        source: Any,
        clear: Optional[np.ndarray] = None,
    ):
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        self.y = np.asarray(rss_db, dtype=float).reshape(-1)
        self.log_d3, self.log_d2 = log_distances(source, positions)
        self.elevation = elevations(source, positions)
        self.clear = _clear_mask(clear, len(self.y))

    @classmethod
    def from_measurements(
        cls, measurements: Any, source: Any, clear: Optional[np.ndarray] = None
    ) -> "SectorData":
        return cls(measurements.positions, measurements.rss_db, source, clear)

    def __len__(self) -> int:
        return len(self.y)

    def labels(self, sv: SupportVectorAngle) -> np.ndarray:
        return ((self.elevation >= sv.alpha) | self.clear).astype(np.uint8)

    def design(self, u_los: np.ndarray) -> np.ndarray:
        return design_matrix(self.log_d3, self.log_d2, u_los)

    def fit(self, u_los: np.ndarray) -> SectorFit:
        return solve_ls(self.design(u_los), self.y)

    def scan(self, candidates: Sequence[SupportVectorAngle]) -> np.ndarray:
        """Residual for every candidate; each distinct labeling is solved once."""
        if len(self) == 0:
            return np.zeros(len(candidates))

        cache: Dict[bytes, float] = {}
        residuals = np.empty(len(candidates))
        for idx, sv in enumerate(candidates):
            labels = self.labels(sv)
            key = labels.tobytes()
            if key not in cache:
                cache[key] = self.fit(labels).residual_sq
            residuals[idx] = cache[key]
        return residuals


def build_design(
    measurements: Any,
    source: Any,
    sv: SupportVectorAngle,
    clear: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Segmented design matrix and RSS vector of one sector.

    Returns:
        ``(D, y)`` with D of shape (n, 6), one row per measurement
    """
    data = SectorData.from_measurements(measurements, source, clear)
    return data.design(data.labels(sv)), data.y


def sector_residual(
    measurements: Any,
    source: Any,
    sv: SupportVectorAngle,
    clear: Optional[np.ndarray] = None,
) -> float:
    """Residual r(s, b_j) of one sector; an empty sector contributes 0."""
    if len(measurements) == 0:
        return 0.0
    design, y = build_design(measurements, source, sv, clear)
    return solve_ls(design, y).residual_sq


def sector_scan(
    measurements: Any,
    source: Any,
    candidates: Sequence[SupportVectorAngle],
    clear: Optional[np.ndarray] = None,
) -> np.ndarray:
    """The column E(:, j) of the error tensor: residuals over all candidates."""
    return SectorData.from_measurements(measurements, source, clear).scan(candidates)


def pick_best(
    residuals: np.ndarray, candidates: Sequence[SupportVectorAngle]
) -> Tuple[SupportVectorAngle, float]:
    """Smallest residual, ties broken by the smallest angle."""
    if len(candidates) == 0:
        raise ValueError("The support-vector candidate list is empty")
    best = min(range(len(candidates)), key=lambda i: (residuals[i], candidates[i].alpha))
    return candidates[best], float(residuals[best])


def best_support_vector(
    measurements: Any,
    source: Any,
    candidates: Sequence[SupportVectorAngle],
    clear: Optional[np.ndarray] = None,
) -> Tuple[SupportVectorAngle, float]:
    """Argmin of the sector residual over the candidate angles."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("The support-vector candidate list is empty")
    return pick_best(sector_scan(measurements, source, candidates, clear), candidates)


def labels_for_sectors(
    positions: np.ndarray,
    source: Any,
    sector_labels: np.ndarray,
    sv_hats: List[SupportVectorAngle],
    clear: Optional[np.ndarray] = None,
) -> np.ndarray:
    """u_los of every measurement under the angle of the sector it belongs to."""
    elevation = elevations(source, positions)
    alphas = np.array([sv.alpha for sv in sv_hats])
    if len(elevation) == 0:
        return np.zeros(0, dtype=np.uint8)
    los = (elevation >= alphas[sector_labels]) | _clear_mask(clear, len(elevation))
    return los.astype(np.uint8)
