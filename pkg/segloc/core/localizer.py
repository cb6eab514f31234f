"""
SegLoc Project - Localizer
Exhaustive residual-minimizing search over candidate sources and support-vector
angles, followed by a global refit of the propagation coefficients.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config.settings import GRID_SPACING, SV_CANDIDATES
from .geometry import (
    AnchorInsideBuildingError,
    EnvironmentMap2D,
    Sectorization,
    as_point3,
    sectorize,
)
from .propagation import MeasurementSet, PropagationParams, log_distances
from .segreg import (
    SectorData,
    SectorFit,
    SupportVectorAngle,
    default_sv_candidates,
    design_matrix,
    labels_for_sectors,
    pick_best,
    solve_ls,
)

# Fewer measurements than this cannot pin down the six coefficients
MIN_WELL_POSED = 6

logger = logging.getLogger(__name__)


class NoAdmissibleCandidateError(ValueError):
    """Raised when every grid candidate lies inside a building footprint."""


@dataclass(frozen=True)
class GridSpec:
    """
    Candidate-source grid over the square ``[xmin, xmax] x [ymin, ymax]``.

    When ``refine_spacing`` is set, a second pass of that spacing runs within
    ``±spacing`` of the coarse optimum.
    """

    spacing: float
    bounds: Tuple[float, float, float, float]
    sv_candidates: Tuple[SupportVectorAngle, ...]
    refine_spacing: Optional[float] = None

    def __post_init__(self):
        if not self.spacing > 0.0:
            raise ValueError(f"Grid spacing must be positive, got {self.spacing}")
        xmin, xmax, ymin, ymax = (float(v) for v in self.bounds)
        if xmin > xmax or ymin > ymax:
            raise ValueError(f"Invalid grid bounds {self.bounds}")
        object.__setattr__(self, "bounds", (xmin, xmax, ymin, ymax))
        candidates = tuple(sorted(self.sv_candidates))
        if not candidates:
            raise ValueError("sv_candidates must not be empty")
        object.__setattr__(self, "sv_candidates", candidates)
        if self.refine_spacing is not None and not 0.0 < self.refine_spacing < self.spacing:
            raise ValueError(
                f"refine spacing must lie in (0, {self.spacing}), got {self.refine_spacing}"
            )

    @classmethod
    def for_map(
        cls,
        env_map: EnvironmentMap2D,
        spacing: float = GRID_SPACING,
        refine_spacing: Optional[float] = None,
        nb: int = SV_CANDIDATES,
    ) -> "GridSpec":
        half = env_map.half_size
        return cls(
            spacing=spacing,
            bounds=(-half, half, -half, half),
            sv_candidates=default_sv_candidates(nb),
            refine_spacing=refine_spacing,
        )

    def points(self) -> List[Tuple[float, float, float]]:
        """Ground-level candidates in (x, then y) order."""
        return _grid_points(self.bounds, self.spacing)

    def refine_points(self, center: Sequence[float]) -> List[Tuple[float, float, float]]:
        """Fine candidates within ``±spacing`` of ``center``, clipped to the bounds."""
        fine = float(self.refine_spacing)
        steps = int(math.floor(self.spacing / fine + 1e-9))
        xmin, xmax, ymin, ymax = self.bounds
        xs = [center[0] + k * fine for k in range(-steps, steps + 1)]
        ys = [center[1] + k * fine for k in range(-steps, steps + 1)]
        return [
            (x, y, 0.0)
            for x in xs
            if xmin - 1e-9 <= x <= xmax + 1e-9
            for y in ys
            if ymin - 1e-9 <= y <= ymax + 1e-9
        ]


def _grid_points(bounds: Tuple[float, float, float, float], spacing: float) -> List[Tuple[float, float, float]]:
    xmin, xmax, ymin, ymax = bounds
    nx = int(math.floor((xmax - xmin) / spacing + 1e-9)) + 1
    ny = int(math.floor((ymax - ymin) / spacing + 1e-9)) + 1
    return [
        (xmin + i * spacing, ymin + k * spacing, 0.0) for i in range(nx) for k in range(ny)
    ]


@dataclass(frozen=True, eq=False)
class CandidateEvaluation:
    """Reduced error-tensor slice of one candidate source."""

    source: Tuple[float, float, float]
    sectorization: Sectorization
    sv_hats: Tuple[SupportVectorAngle, ...]
    sector_residuals: Tuple[float, ...]
    total_residual: float
    residual_matrix: Optional[np.ndarray] = None

    @property
    def key(self) -> Tuple[float, float, float]:
        """Ordering used by the argmin: residual, then x, then y."""
        return (self.total_residual, self.source[0], self.source[1])


@dataclass
class ErrorTensor:
    """
    Ragged error tensor: for each candidate, the J(s) x N_b residual matrix
    under the sectorization used at that candidate.
    """

    sv_candidates: Tuple[SupportVectorAngle, ...]
    entries: List[CandidateEvaluation] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sv_candidates": [sv.alpha for sv in self.sv_candidates],
            "candidates": [
                {
                    "source": list(entry.source),
                    "boundaries": list(entry.sectorization.boundaries),
                    "residuals": entry.residual_matrix.tolist(),
                    "total_residual": entry.total_residual,
                }
                for entry in self.entries
            ],
        }


@dataclass(frozen=True)
class LocalizationResult:
    """Estimated source, per-sector angles, refit coefficients and diagnostics."""

    s_hat: Tuple[float, float, float]
    sv_hats: Tuple[SupportVectorAngle, ...]
    phi_hat: PropagationParams
    total_residual: float
    per_sector_residuals: Tuple[float, ...]
    candidate_count: int
    boundaries: Tuple[float, ...] = ()
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def evaluate_candidate(
    env_map: EnvironmentMap2D,
    measurements: MeasurementSet,
    source: Any,
    sv_candidates: Sequence[SupportVectorAngle],
    keep_matrix: bool = False,
) -> CandidateEvaluation:
    """
    Sectorize at ``source``, pick the best angle per sector and sum the minima.

    Receivers that no footprint hides from ``source`` are LOS under every angle.

    Raises:
        AnchorInsideBuildingError: if ``source`` lies inside a footprint
    """
    point = as_point3(source)
    candidates = list(sv_candidates)
    sectors = sectorize(env_map, point, measurements)
    positions, rss, clear = measurements.positions, measurements.rss_db, sectors.clear

    sv_hats, residuals, rows = [], [], []
    for members in sectors.assignments:
        part = None if clear is None else clear[members]
        scan = SectorData(positions[members], rss[members], point, part).scan(candidates)
        sv, residual = pick_best(scan, candidates)
        sv_hats.append(sv)
        residuals.append(residual)
        if keep_matrix:
            rows.append(scan)

    return CandidateEvaluation(
        source=sectors.anchor,
        sectorization=sectors,
        sv_hats=tuple(sv_hats),
        sector_residuals=tuple(residuals),
        total_residual=float(sum(residuals)),
        residual_matrix=np.vstack(rows) if keep_matrix else None,
    )


def _evaluate_chunk(
    env_map: EnvironmentMap2D,
    measurements: MeasurementSet,
    points: List[Tuple[float, float, float]],
    sv_candidates: Tuple[SupportVectorAngle, ...],
    keep_matrix: bool,
) -> Tuple[Optional[CandidateEvaluation], List[CandidateEvaluation], int]:
    """Best evaluation of a chunk, the retained evaluations and the excluded count."""
    best: Optional[CandidateEvaluation] = None
    kept: List[CandidateEvaluation] = []
    excluded = 0
    for point in points:
        try:
            evaluation = evaluate_candidate(
                env_map, measurements, point, sv_candidates, keep_matrix
            )
        except AnchorInsideBuildingError:
            excluded += 1
            continue
        if keep_matrix:
            kept.append(evaluation)
        if best is None or evaluation.key < best.key:
            best = evaluation
    return best, kept, excluded


def search_grid(
    env_map: EnvironmentMap2D,
    measurements: MeasurementSet,
    points: List[Tuple[float, float, float]],
    sv_candidates: Tuple[SupportVectorAngle, ...],
    workers: int = 1,
    tensor: Optional[ErrorTensor] = None,
) -> Tuple[CandidateEvaluation, int]:
    """
    Evaluate every admissible point and reduce with the ``(e, x, y)`` order.

    The reduction is a lexicographic minimum, so any partition of the points
    across workers gives the same answer.

    Returns:
        Tuple of (best evaluation, number of excluded candidates)
    """
    keep = tensor is not None
    if workers <= 1 or len(points) < 2 * workers:
        results = [_evaluate_chunk(env_map, measurements, points, sv_candidates, keep)]
    else:
        chunks = [points[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_evaluate_chunk, env_map, measurements, chunk, sv_candidates, keep)
                for chunk in chunks
            ]
            results = [future.result() for future in futures]

    best: Optional[CandidateEvaluation] = None
    excluded = 0
    for chunk_best, kept, chunk_excluded in results:
        excluded += chunk_excluded
        if tensor is not None:
            tensor.entries.extend(kept)
        if chunk_best is not None and (best is None or chunk_best.key < best.key):
            best = chunk_best

    if tensor is not None:
        tensor.entries.sort(key=lambda e: (e.source[0], e.source[1]))
    if best is None:
        raise NoAdmissibleCandidateError(
            f"All {len(points)} grid candidates lie inside buildings"
        )
    return best, excluded


def refit_fit(
    measurements: MeasurementSet,
    sectorization: Sectorization,
    sv_hats: Sequence[SupportVectorAngle],
) -> SectorFit:
    """Global least squares over all measurements, labeled by their sector's angle."""
    sv_hats = list(sv_hats)
    if len(sv_hats) != sectorization.J:
        raise ValueError(
            f"Expected {sectorization.J} support-vector angles, got {len(sv_hats)}"
        )
    positions = measurements.positions
    source = sectorization.anchor
    labels = labels_for_sectors(
        positions,
        source,
        sectorization.labels(len(measurements)),
        sv_hats,
        sectorization.clear,
    )
    log_d3, log_d2 = log_distances(source, positions)
    return solve_ls(design_matrix(log_d3, log_d2, labels), measurements.rss_db)


def refit_global(
    measurements: MeasurementSet,
    sectorization: Sectorization,
    sv_hats: Sequence[SupportVectorAngle],
) -> PropagationParams:
    """Shared coefficients phi fitted to every measurement at the estimated source."""
    return refit_fit(measurements, sectorization, sv_hats).phi


def localize(
    env_map: EnvironmentMap2D,
    measurements: MeasurementSet,
    grid: GridSpec,
    workers: int = 1,
    keep_tensor: bool = False,
) -> Tuple[LocalizationResult, Optional[ErrorTensor]]:
    """
    Grid search for the candidate with the smallest summed sector residual.

    Only building footprints and the measured RSS are used; heights and LOS
    labels are stripped before the search.

    Returns:
        Tuple of (LocalizationResult, ErrorTensor or None)
    """
    view = env_map.footprints_only()
    observed = measurements.without_truth()
    tensor = ErrorTensor(grid.sv_candidates) if keep_tensor else None

    points = grid.points()
    logger.info(
        f"Searching {len(points)} candidates x {len(grid.sv_candidates)} angles "
        f"over {len(observed)} measurements"
    )
    best, excluded = search_grid(
        view, observed, points, grid.sv_candidates, workers, tensor
    )
    coarse_residual = best.total_residual
    candidate_count = len(points)

    if grid.refine_spacing is not None:
        fine_points = grid.refine_points(best.source)
        logger.debug(f"Refining around {best.source} with {len(fine_points)} candidates")
        fine_best, fine_excluded = search_grid(
            view, observed, fine_points, grid.sv_candidates, workers, tensor
        )
        candidate_count += len(fine_points)
        excluded += fine_excluded
        if fine_best.key < best.key:
            best = fine_best

    if excluded:
        logger.debug(f"{excluded} candidates inside buildings were skipped")

    refit = refit_fit(observed, best.sectorization, best.sv_hats)
    degenerate = len(observed) < MIN_WELL_POSED
    if degenerate:
        logger.warning(
            f"Only {len(observed)} measurements; the estimate is not well posed"
        )

    result = LocalizationResult(
        s_hat=best.source,
        sv_hats=best.sv_hats,
        phi_hat=refit.phi,
        total_residual=best.total_residual,
        per_sector_residuals=best.sector_residuals,
        candidate_count=candidate_count,
        boundaries=best.sectorization.boundaries,
        diagnostics={
            "excluded_candidates": excluded,
            "coarse_residual": coarse_residual,
            "refit_residual": refit.residual_sq,
            "refined": grid.refine_spacing is not None,
            "degenerate": degenerate,
            "measurement_count": len(observed),
        },
    )
    return result, tensor
