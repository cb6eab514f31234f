"""
SegLoc Project - Benchmark Runner
Monte-Carlo sweeps comparing segmented-regression localization with the
weighted-centroid baselines.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config.settings import (
    BENCH_SEED,
    BENCH_TRIALS,
    GRID_SPACING,
    REFINE_SPACING,
    SV_CANDIDATES,
)
from ..core.baselines import WCL_METHODS, wcl
from ..core.localizer import GridSpec, localize
from ..core.propagation import MeasurementSet, Scenario, generate_measurements
from ..core.validators import BENCH_METHODS, SWEEP_PARAMETERS, canonical_method
from .data_handlers import SUMMARY_COLUMNS, records_frame, scenario_from_dict

DEFAULT_MEASUREMENT_COUNT = 200

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRecord:
    """Horizontal error of one method on one trial."""

    method: str
    sweep_value: float
    trial_seed: int
    rmse_m: float
    runtime_ms: float = 0.0

    def __post_init__(self):
        if not self.rmse_m >= 0.0:
            raise ValueError(f"rmse_m must be non-negative, got {self.rmse_m}")


@dataclass(frozen=True)
class TrialFailure:
    method: str
    sweep_value: float
    trial_seed: int
    message: str


@dataclass(frozen=True)
class BenchPlan:
    """
    A sweep over one parameter with ``trials`` seeded repetitions per value.

    Trial ``t`` of every sweep value uses seed ``seed + t``, so the sweep
    values of one trial share their measurement positions and shadowing draws.
    """

    scenario: Scenario
    sweep: str
    values: Tuple[float, ...]
    methods: Tuple[str, ...]
    trials: int = BENCH_TRIALS
    count: int = DEFAULT_MEASUREMENT_COUNT
    grid_spacing: float = GRID_SPACING
    refine_spacing: Optional[float] = REFINE_SPACING
    nb: int = SV_CANDIDATES
    seed: int = BENCH_SEED
    timing: bool = True

    def __post_init__(self):
        if self.sweep not in SWEEP_PARAMETERS:
            raise ValueError(f"Unknown sweep parameter: {self.sweep}")
        if not self.values:
            raise ValueError("The sweep needs at least one value")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        methods = tuple(canonical_method(m) for m in self.methods)
        unknown = [m for m in methods if m not in BENCH_METHODS]
        if unknown or not methods:
            raise ValueError(f"Unsupported methods: {unknown or 'none given'}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "methods", methods)
        # Rejects a refine spacing that is not finer than the grid before any trial runs
        self.grid()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BenchPlan":
        """Build a plan from an already validated plan document."""
        scenario = (
            scenario_from_dict(data["scenario"])
            if "scenario" in data
            else Scenario.default()
        )
        grid = data.get("grid", {})
        return cls(
            scenario=scenario,
            sweep=data["sweep"],
            values=tuple(data["values"]),
            methods=tuple(data["methods"]),
            trials=int(data.get("trials", BENCH_TRIALS)),
            count=int(data.get("count", DEFAULT_MEASUREMENT_COUNT)),
            grid_spacing=float(grid.get("spacing", GRID_SPACING)),
            refine_spacing=grid.get("refine"),
            nb=int(grid.get("nb", SV_CANDIDATES)),
            seed=int(data.get("seed", BENCH_SEED)),
            timing=bool(data.get("timing", True)),
        )

    def grid(self) -> GridSpec:
        return GridSpec.for_map(
            self.scenario.map, self.grid_spacing, self.refine_spacing, self.nb
        )

    def setting(self, value: float) -> Tuple[Scenario, int]:
        """Scenario and measurement count of one sweep value."""
        if self.sweep == "count":
            return self.scenario, int(value)
        if self.sweep == "sigma_los":
            return self.scenario.with_noise(sigma_los=value), self.count
        return self.scenario.with_noise(sigma_nlos=value), self.count

    def tasks(self) -> List[Tuple[float, int]]:
        return [(v, self.seed + t) for v in self.values for t in range(self.trials)]


@dataclass
class BenchResult:
    records: List[BenchRecord] = field(default_factory=list)
    failures: List[TrialFailure] = field(default_factory=list)

    @property
    def summary(self) -> pd.DataFrame:
        return aggregate(self.records, self.failures)


def horizontal_error(estimate: Sequence[float], source: Sequence[float]) -> float:
    return math.hypot(float(estimate[0]) - source[0], float(estimate[1]) - source[1])


def estimate_source(
    method: str,
    scenario: Scenario,
    measurements: MeasurementSet,
    grid: GridSpec,
) -> np.ndarray:
    """Run one method and return its (x, y, 0) estimate."""
    if method == "segreg":
        result, _ = localize(scenario.map, measurements, grid)
        return np.asarray(result.s_hat)
    return wcl(measurements, WCL_METHODS[method])


def run_trial(
    plan: BenchPlan, value: float, trial_seed: int
) -> Tuple[List[BenchRecord], List[TrialFailure]]:
    """Generate one measurement set and run every method of the plan on it."""
    scenario, count = plan.setting(value)
    grid = plan.grid()
    measurements = generate_measurements(scenario, count, trial_seed)

    records, failures = [], []
    for method in plan.methods:
        started = time.perf_counter()
        try:
            estimate = estimate_source(method, scenario, measurements, grid)
        except (ValueError, np.linalg.LinAlgError) as e:
            logger.warning(
                f"{method} failed at {plan.sweep}={value}, seed {trial_seed}: {e}"
            )
            failures.append(TrialFailure(method, value, trial_seed, str(e)))
            continue
        elapsed = (time.perf_counter() - started) * 1000.0 if plan.timing else 0.0
        records.append(
            BenchRecord(
                method=method,
                sweep_value=value,
                trial_seed=trial_seed,
                rmse_m=horizontal_error(estimate, scenario.source),
                runtime_ms=elapsed,
            )
        )
    return records, failures


def _run_task(args: Tuple[BenchPlan, float, int]) -> Tuple[List[BenchRecord], List[TrialFailure]]:
    return run_trial(*args)


def run_bench(plan: BenchPlan, workers: int = 1) -> BenchResult:
    """
    Run every (sweep value, seed) trial of the plan.

    Trials run in ``workers`` processes; records come back ordered by
    (method, sweep_value, trial_seed) with methods in plan order, so the
    output does not depend on the worker count.
    """
    tasks = [(plan, value, seed) for value, seed in plan.tasks()]
    logger.info(
        f"Running {len(tasks)} trials of {len(plan.methods)} methods "
        f"over {plan.sweep} in {max(workers, 1)} process(es)"
    )

    if workers <= 1:
        outcomes = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_task, tasks))

    result = BenchResult()
    for records, failures in outcomes:
        result.records.extend(records)
        result.failures.extend(failures)

    order = {method: idx for idx, method in enumerate(plan.methods)}
    result.records.sort(key=lambda r: (order[r.method], r.sweep_value, r.trial_seed))
    result.failures.sort(key=lambda f: (order[f.method], f.sweep_value, f.trial_seed))

    if result.failures:
        logger.warning(
            f"{len(result.failures)} trial(s) failed and were left out of the aggregate"
        )
    return result


def aggregate(
    records: Sequence[BenchRecord], failures: Sequence[TrialFailure] = ()
) -> pd.DataFrame:
    """
    Per (method, sweep_value): trial count, failure count and
    RMSE = sqrt(mean of squared horizontal errors).
    """
    frame = records_frame(records)
    frame["squared"] = frame["rmse_m"] ** 2
    summary = (
        frame.groupby(["method", "sweep_value"], sort=False)
        .agg(trials=("squared", "size"), mean_squared=("squared", "mean"))
        .reset_index()
    )
    summary["rmse_m"] = np.sqrt(summary["mean_squared"].astype(float))

    failed = pd.DataFrame(
        {
            "method": pd.Series([f.method for f in failures], dtype=object),
            "sweep_value": pd.Series([f.sweep_value for f in failures], dtype=float),
        }
    )
    counts = failed.groupby(["method", "sweep_value"]).size().rename("failures")
    summary = summary.merge(
        counts.reset_index(), on=["method", "sweep_value"], how="outer"
    )
    summary["trials"] = summary["trials"].fillna(0).astype(int)
    summary["failures"] = summary["failures"].fillna(0).astype(int)
    summary = summary.sort_values(["method", "sweep_value"], kind="stable")
    return summary[SUMMARY_COLUMNS].reset_index(drop=True)


def improvement_over(
    summary: pd.DataFrame, method: str, baselines: Sequence[str]
) -> pd.Series:
    """
    Relative RMSE reduction of ``method`` over the best of ``baselines`` per
    sweep value: ``1 - rmse(method) / min(rmse(baselines))``.
    """
    table = summary.pivot(index="sweep_value", columns="method", values="rmse_m")
    missing = [m for m in [method, *baselines] if m not in table.columns]
    if missing:
        raise ValueError(f"Summary has no rows for {missing}")
    best_baseline = table[list(baselines)].min(axis=1)
    return (1.0 - table[method] / best_baseline).rename("improvement")
