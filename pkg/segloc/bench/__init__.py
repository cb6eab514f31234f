"""
SegLoc Project - Bench Module
Monte-Carlo benchmark runner and the file formats it reads and writes.
"""

from .data_handlers import (
    MeasurementParseError,
    load_plan_data,
    load_scenario,
    read_measurements,
    read_records,
    write_measurements,
    write_records,
    write_result,
)
from .runner import BenchPlan, BenchRecord, aggregate, improvement_over, run_bench

__all__ = [
    "BenchPlan",
    "BenchRecord",
    "MeasurementParseError",
    "aggregate",
    "improvement_over",
    "load_plan_data",
    "load_scenario",
    "read_measurements",
    "read_records",
    "run_bench",
    "write_measurements",
    "write_records",
    "write_result",
]
