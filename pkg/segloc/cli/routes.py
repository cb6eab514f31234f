"""
SegLoc Project - CLI Routes
Subcommand parsers and handlers: simulate, localize, baseline and bench.
"""

import argparse
import logging
from pathlib import Path

from ..bench.data_handlers import (
    list_packaged,
    load_plan_data,
    load_scenario,
    read_measurements,
    resolve_config_path,
    write_estimate,
    write_measurements,
    write_records,
    write_result,
    write_summary,
    write_tensor,
)
from ..bench.runner import BenchPlan, improvement_over, run_bench
from ..config.settings import (
    BENCH_SEED,
    GRID_SPACING,
    LOG_LEVEL,
    SV_CANDIDATES,
    WORKERS,
)
from ..core.baselines import WCL_METHODS, wcl
from ..core.localizer import GridSpec, localize
from ..core.propagation import generate_measurements
from ..core.validators import validate_grid_options

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """Raised by a handler when option values are individually valid but unusable."""


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--workers",
        type=int,
        default=WORKERS,
        help=f"worker processes (default: {WORKERS})",
    )
    common.add_argument(
        "--log-level",
        default=LOG_LEVEL,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help=f"diagnostic verbosity on stderr (default: {LOG_LEVEL})",
    )
    return common


def create_cli_routes(subparsers) -> None:
    """
    Register every subcommand on the given argparse subparsers object.

    Args:
        subparsers: Result of ``ArgumentParser.add_subparsers()``
    """
    common = _common_options()

    simulate = subparsers.add_parser(
        "simulate", parents=[common], help="draw seeded measurements for a scenario"
    )
    simulate.add_argument("--scenario", help="scenario JSON (default: reference scenario)")
    simulate.add_argument("--count", type=int, required=True, help="number of measurements")
    simulate.add_argument("--seed", type=int, default=BENCH_SEED, help="random seed")
    simulate.add_argument("--out", required=True, help="output measurement CSV")
    simulate.set_defaults(handler=handle_simulate)

    locate = subparsers.add_parser(
        "localize", parents=[common], help="estimate the source from RSS measurements"
    )
    locate.add_argument("--scenario", help="scenario JSON providing the building footprints")
    locate.add_argument("--measurements", required=True, help="measurement CSV")
    locate.add_argument(
        "--grid-spacing", type=float, default=GRID_SPACING, help="coarse grid spacing (m)"
    )
    locate.add_argument("--refine", type=float, help="fine spacing around the coarse optimum (m)")
    locate.add_argument(
        "--nb", type=int, default=SV_CANDIDATES, help="number of support-vector angles"
    )
    locate.add_argument("--dump-tensor", help="write the error tensor as JSON")
    locate.add_argument("--out", required=True, help="output result JSON")
    locate.set_defaults(handler=handle_localize)

    baseline = subparsers.add_parser(
        "baseline", parents=[common], help="weighted-centroid estimate"
    )
    baseline.add_argument("--method", choices=sorted(WCL_METHODS), required=True)
    baseline.add_argument("--measurements", required=True, help="measurement CSV")
    baseline.add_argument("--out", required=True, help="output estimate JSON")
    baseline.set_defaults(handler=handle_baseline)

    bench = subparsers.add_parser(
        "bench",
        parents=[common],
        help="Monte-Carlo RMSE sweep",
        epilog=f"packaged plans: {', '.join(list_packaged()) or 'none'}",
    )
    bench.add_argument("--plan", required=True, help="plan JSON (path or packaged name)")
    bench.add_argument("--out", required=True, help="output records CSV")
    bench.add_argument("--summary", help="also write the per-method summary CSV")
    bench.set_defaults(handler=handle_bench)


def handle_simulate(args: argparse.Namespace) -> int:
    """Write ``--count`` measurements drawn with ``--seed``."""
    scenario = load_scenario(args.scenario)
    measurements = generate_measurements(scenario, args.count, args.seed)
    write_measurements(args.out, measurements)
    logger.info(f"Simulated {len(measurements)} measurements into {args.out}")
    return 0


def handle_localize(args: argparse.Namespace) -> int:
    """
    Localize from a measurement CSV.

    The ``los`` column is never read and building heights are dropped by the
    localizer before the search.
    """
    is_valid, error_message = validate_grid_options(
        args.grid_spacing, args.refine, args.nb
    )
    if not is_valid:
        raise UsageError(error_message)

    scenario = load_scenario(args.scenario)
    measurements = read_measurements(args.measurements, with_truth=False)
    if len(measurements) == 0:
        raise ValueError(f"{args.measurements} holds no measurements")

    grid = GridSpec.for_map(scenario.map, args.grid_spacing, args.refine, args.nb)
    result, tensor = localize(
        scenario.map,
        measurements,
        grid,
        workers=args.workers,
        keep_tensor=args.dump_tensor is not None,
    )
    write_result(args.out, result)
    if tensor is not None:
        write_tensor(args.dump_tensor, tensor)

    logger.info(
        f"Estimated source {result.s_hat} with residual {result.total_residual:.6g} dB^2"
    )
    return 0


def handle_baseline(args: argparse.Namespace) -> int:
    measurements = read_measurements(args.measurements)
    estimate = wcl(measurements, WCL_METHODS[args.method])
    write_estimate(args.out, args.method, estimate, len(measurements))
    logger.info(f"{args.method} estimate {tuple(estimate)}")
    return 0


def handle_bench(args: argparse.Namespace) -> int:
    """Run a plan, write its records and optionally the summary."""
    plan_path = resolve_config_path(args.plan)
    plan = BenchPlan.from_dict(load_plan_data(plan_path))
    result = run_bench(plan, workers=args.workers)

    write_records(args.out, result.records)
    summary = result.summary
    if args.summary:
        write_summary(args.summary, summary)

    baselines = [m for m in plan.methods if m in ("wcl", "wcl-mod")]
    if "segreg" in plan.methods and baselines and not summary.empty:
        try:
            gains = improvement_over(summary, "segreg", baselines)
        except ValueError as e:
            logger.warning(f"No improvement figures: {e}")
        else:
            for value, gain in gains.items():
                logger.info(f"{plan.sweep}={value:g}: segreg improves on WCL by {gain:.1%}")

    logger.info(
        f"Bench {Path(plan_path).name}: {len(result.records)} records, "
        f"{len(result.failures)} failures"
    )
    return 0
