"""Experiment configuration and seeded random-stream handling."""

from __future__ import annotations

import configparser
import hashlib
import random
from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    """Raised when a configuration fails validation."""


@dataclass
class LatencyModel:
    """Cycle costs of the simulated interconnect and runtime-code processing.

    Defaults are calibrated so that, on the default mesh, a nearest-neighbor
    message round trip is 38 cycles, a DMA starts in 24 cycles, and
    back-to-back message processing on a slow core lands in the 450-750
    cycle band (msg_process_cycles * slow_core_factor = 600).
    """

    msg_base_cycles: int = 17
    msg_per_hop_cycles: int = 2
    dma_startup_cycles: int = 24
    dma_bytes_per_cycle: int = 4
    msg_process_cycles: int = 80
    slow_core_factor: float = 7.5

    def validate(self) -> None:
        for name, value in asdict(self).items():
            if value <= 0:
                raise ConfigError(f"latency field {name} must be positive, got {value}")

    def msg_latency(self, hops: int) -> int:
        return self.msg_base_cycles + self.msg_per_hop_cycles * hops

    def dma_latency(self, size_bytes: int, hops: int) -> int:
        xfer = -(-size_bytes // self.dma_bytes_per_cycle)  # ceil div
        return self.dma_startup_cycles + xfer + self.msg_per_hop_cycles * hops

    def proc_cost(self, slow: bool) -> int:
        if slow:
            return int(round(self.msg_process_cycles * self.slow_core_factor))
        return self.msg_process_cycles


@dataclass
class SimConfig:
    """Full description of one simulation run."""

    sched_levels: list[int] = field(default_factory=lambda: [1])
    workers: int = 1
    mesh_dims: tuple[int, int, int] | None = None
    cores_per_node: int = 8
    heterogeneous: bool = True
    latency: LatencyModel = field(default_factory=LatencyModel)
    p_bias: int = 20
    kernel: str = "synthetic_flat"
    kernel_params: dict = field(default_factory=dict)
    scaling: str = "strong"
    seed: int = 0
    cycle_budget: int = 2_000_000_000
    msg_size: int = 64
    buffer_slots: int = 8
    load_report_task_threshold: int = 2
    load_report_region_threshold: int = 1
    slab_watermark: int = 4
    total_pages: int = 4096
    audit: bool = True
    carry_payloads: bool = False
    trace: bool = False
    proc_jitter_pct: int = 0

    def validate(self) -> None:
        self.latency.validate()
        if not self.sched_levels or self.sched_levels[0] != 1:
            raise ConfigError("sched_levels must start with a single top scheduler")
        for prev, cur in zip(self.sched_levels, self.sched_levels[1:]):
            if cur <= 0 or cur % prev != 0:
                raise ConfigError(
                    f"scheduler level sizes must nest evenly, got {self.sched_levels}"
                )
        if self.workers < self.sched_levels[-1]:
            raise ConfigError(
                f"{self.workers} workers cannot cover {self.sched_levels[-1]} leaf schedulers"
            )
        if not 0 <= self.p_bias <= 100:
            raise ConfigError("p_bias must be in [0, 100]")
        if self.msg_size < 16:
            raise ConfigError("msg_size must be at least 16 bytes")
        if self.buffer_slots < 1:
            raise ConfigError("buffer_slots must be >= 1")
        if self.total_pages < 1:
            raise ConfigError("total_pages must be >= 1")
        if self.cores_per_node < 1:
            raise ConfigError("cores_per_node must be >= 1")
        if self.mesh_dims is not None:
            need = -(-self.n_cores // self.cores_per_node)
            have = self.mesh_dims[0] * self.mesh_dims[1] * self.mesh_dims[2]
            if have < need:
                raise ConfigError(f"mesh {self.mesh_dims} too small for {self.n_cores} cores")
        if not 0 <= self.proc_jitter_pct <= 90:
            raise ConfigError("proc_jitter_pct must be in [0, 90]")

    @property
    def n_schedulers(self) -> int:
        return sum(self.sched_levels)

    @property
    def n_cores(self) -> int:
        return self.n_schedulers + self.workers

    def stream(self, name: str) -> random.Random:
        """Named random stream derived from the run seed.

        Every module draws from its own stream so adding a consumer never
        perturbs the draws seen by others.
        """
        digest = hashlib.sha256(f"{self.seed}:{name}".encode()).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def describe(self) -> dict:
        d = asdict(self)
        d["mesh_dims"] = list(self.mesh_dims) if self.mesh_dims else None
        return d


def _parse_value(raw: str):
    raw = raw.strip()
    low = raw.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path: str) -> SimConfig:
    """Read a SimConfig from an INI file.

    Sections: [topology], [latency], [run], [workload]; unknown keys are
    rejected so typos fail fast.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = SimConfig()

    topo_keys = {
        "sched_levels", "workers", "mesh_dims", "cores_per_node", "heterogeneous",
    }
    run_keys = {
        "p_bias", "seed", "cycle_budget", "msg_size", "buffer_slots",
        "load_report_task_threshold", "load_report_region_threshold",
        "slab_watermark", "total_pages", "audit", "carry_payloads", "trace",
        "scaling", "proc_jitter_pct",
    }
    lat_keys = {f for f in LatencyModel.__dataclass_fields__}

    for section in parser.sections():
        for key, raw in parser.items(section):
            if section == "topology":
                if key not in topo_keys:
                    raise ConfigError(f"unknown topology key {key}")
                if key == "sched_levels":
                    cfg.sched_levels = [int(x) for x in raw.replace(",", " ").split()]
                elif key == "mesh_dims":
                    dims = [int(x) for x in raw.replace(",", " ").split()]
                    if len(dims) != 3:
                        raise ConfigError("mesh_dims needs three values")
                    cfg.mesh_dims = (dims[0], dims[1], dims[2])
                else:
                    setattr(cfg, key, _parse_value(raw))
            elif section == "latency":
                if key not in lat_keys:
                    raise ConfigError(f"unknown latency key {key}")
                setattr(cfg.latency, key, _parse_value(raw))
            elif section == "run":
                if key not in run_keys:
                    raise ConfigError(f"unknown run key {key}")
                setattr(cfg, key, _parse_value(raw))
            elif section == "workload":
                if key == "kernel":
                    cfg.kernel = raw.strip()
                else:
                    cfg.kernel_params[key] = _parse_value(raw)
            else:
                raise ConfigError(f"unknown config section [{section}]")
    cfg.validate()
    return cfg
