"""Deterministic manycore simulator with a hierarchical task-dataflow runtime.

The package couples a discrete-event model of a non-coherent manycore chip
(tree of scheduler and worker cores on a 3D mesh NoC) with a full runtime:
region-based memory management, hierarchical dependency analysis, and
locality/load-balance task scheduling.  A single-threaded serial executor
runs the same programs in program order and acts as the correctness oracle.
"""

from .config import LatencyModel, SimConfig
from .api import WorkloadProgram, TaskContext
from .serial import run_serial
from .runtimesys import run_parallel
from .metrics import MetricsReport

__all__ = [
    "LatencyModel",
    "SimConfig",
    "WorkloadProgram",
    "TaskContext",
    "run_serial",
    "run_parallel",
    "MetricsReport",
]
