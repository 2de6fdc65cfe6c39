"""Core tree topology and 3D mesh placement.

Cores specialize as schedulers or workers and talk strictly along tree
edges: workers to their leaf scheduler, schedulers to parent and children.
Core ids are dense: schedulers first in level order (top scheduler is 0),
then workers.  Placement walks the tree depth-first and fills mesh nodes in
that order, so sibling groups end up spatially adjacent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .config import SimConfig, ConfigError


class Role(Enum):
    SCHEDULER = "scheduler"
    WORKER = "worker"


class SpeedClass(Enum):
    FAST = "fast"
    SLOW = "slow"


@dataclass(frozen=True)
class Coord3D:
    x: int
    y: int
    z: int


def hop_distance(a: Coord3D, b: Coord3D) -> int:
    """Manhattan distance between two mesh coordinates."""
    return abs(a.x - b.x) + abs(a.y - b.y) + abs(a.z - b.z)


@dataclass
class CoreNode:
    id: int
    role: Role
    speed: SpeedClass
    level: int  # scheduler tree level; workers sit one below the leaf level
    parent: int | None = None
    children: list[int] = field(default_factory=list)
    coord: Coord3D = Coord3D(0, 0, 0)


def _auto_mesh(n_nodes: int) -> tuple[int, int, int]:
    # Smallest near-cubic box holding n_nodes node slots.
    x = 1
    while x * x * x < n_nodes:
        x += 1
    dims = [x, x, x]
    for axis in (2, 1, 0):
        while dims[0] * dims[1] * dims[2] >= n_nodes and dims[axis] > 1:
            dims[axis] -= 1
            if dims[0] * dims[1] * dims[2] < n_nodes:
                dims[axis] += 1
                break
    return (dims[0], dims[1], dims[2])


class Topology:
    """Static core tree plus mesh placement for one configuration."""

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.n_schedulers = config.n_schedulers
        self.n_workers = config.workers
        self.cores: list[CoreNode] = []
        self._build_tree(config)
        self._place_on_mesh(config)
        self._index()

    # -- construction -------------------------------------------------

    def _build_tree(self, config: SimConfig) -> None:
        levels = config.sched_levels
        speed_sched = SpeedClass.FAST if config.heterogeneous else SpeedClass.SLOW
        offset = 0
        level_ids: list[list[int]] = []
        for lvl, count in enumerate(levels):
            ids = list(range(offset, offset + count))
            level_ids.append(ids)
            for cid in ids:
                self.cores.append(CoreNode(cid, Role.SCHEDULER, speed_sched, lvl))
            offset += count
        # Link scheduler levels with even fanout.
        for lvl in range(1, len(levels)):
            fanout = levels[lvl] // levels[lvl - 1]
            for i, cid in enumerate(level_ids[lvl]):
                parent = level_ids[lvl - 1][i // fanout]
                self.cores[cid].parent = parent
                self.cores[parent].children.append(cid)
        # Workers split into contiguous blocks under the leaf schedulers.
        leafs = level_ids[-1]
        n_leafs = len(leafs)
        base, extra = divmod(config.workers, n_leafs)
        wid = self.n_schedulers
        worker_level = len(levels)
        for i, leaf in enumerate(leafs):
            block = base + (1 if i < extra else 0)
            if block == 0:
                raise ConfigError("every leaf scheduler needs at least one worker")
            for _ in range(block):
                self.cores.append(
                    CoreNode(wid, Role.WORKER, SpeedClass.SLOW, worker_level, parent=leaf)
                )
                self.cores[leaf].children.append(wid)
                wid += 1

    def _place_on_mesh(self, config: SimConfig) -> None:
        n_nodes = -(-len(self.cores) // config.cores_per_node)
        dims = config.mesh_dims or _auto_mesh(n_nodes)
        self.mesh_dims = dims
        order: list[int] = []

        def dfs(cid: int) -> None:
            order.append(cid)
            for ch in self.cores[cid].children:
                dfs(ch)

        dfs(0)
        coords = []
        for z in range(dims[2]):
            for y in range(dims[1]):
                for x in range(dims[0]):
                    coords.append(Coord3D(x, y, z))
        for slot, cid in enumerate(order):
            self.cores[cid].coord = coords[slot // config.cores_per_node]

    def _index(self) -> None:
        roots = [c for c in self.cores if c.parent is None]
        assert len(roots) == 1 and roots[0].id == 0
        self.leaf_scheds = [
            c.id for c in self.cores
            if c.role is Role.SCHEDULER and self.cores[c.children[0]].role is Role.WORKER
        ]
        # Contiguous worker-id range under every scheduler.
        self._wrange: dict[int, tuple[int, int]] = {}
        self._descendant_scheds: dict[int, frozenset[int]] = {}

        def walk(cid: int) -> tuple[int, int, set[int]]:
            node = self.cores[cid]
            if node.role is Role.WORKER:
                return cid, cid + 1, set()
            lo, hi = None, None
            scheds = {cid}
            for ch in node.children:
                clo, chi, cscheds = walk(ch)
                scheds |= cscheds
                lo = clo if lo is None else min(lo, clo)
                hi = chi if hi is None else max(hi, chi)
            self._wrange[cid] = (lo, hi)
            self._descendant_scheds[cid] = frozenset(scheds)
            return lo, hi, scheds

        walk(0)
        self.n_levels = len(self.config.sched_levels)

    # -- queries ------------------------------------------------------

    def is_scheduler(self, cid: int) -> bool:
        return self.cores[cid].role is Role.SCHEDULER

    def is_leaf_sched(self, cid: int) -> bool:
        return cid in self._wrange and self.cores[self.cores[cid].children[0]].role is Role.WORKER

    def parent_of(self, cid: int) -> int | None:
        return self.cores[cid].parent

    def children_of(self, cid: int) -> list[int]:
        return self.cores[cid].children

    def peers_of(self, cid: int) -> list[int]:
        node = self.cores[cid]
        peers = list(node.children)
        if node.parent is not None:
            peers.append(node.parent)
        return peers

    def are_peers(self, a: int, b: int) -> bool:
        return self.cores[a].parent == b or self.cores[b].parent == a

    def worker_range(self, sched: int) -> tuple[int, int]:
        return self._wrange[sched]

    def workers_under(self, sched: int) -> range:
        lo, hi = self._wrange[sched]
        return range(lo, hi)

    def contains_worker(self, sched: int, worker: int) -> bool:
        lo, hi = self._wrange[sched]
        return lo <= worker < hi

    def contains_sched(self, sched: int, other: int) -> bool:
        return other in self._descendant_scheds[sched]

    def hops(self, a: int, b: int) -> int:
        return hop_distance(self.cores[a].coord, self.cores[b].coord)

    def sched_level(self, sched: int) -> int:
        return self.cores[sched].level

    def next_hop(self, at: int, target: int) -> int:
        """Next tree edge to take from scheduler `at` toward core `target`."""
        if at == target:
            raise ValueError("already at target")
        node = self.cores[at]
        tnode = self.cores[target]
        if tnode.role is Role.WORKER:
            if self.contains_worker(at, target):
                if self.is_leaf_sched(at):
                    return target
                for ch in node.children:
                    if self.contains_worker(ch, target):
                        return ch
            return node.parent
        if self.contains_sched(at, target):
            # Walk up from the target until we hit a direct child of `at`.
            cur = target
            while self.cores[cur].parent != at:
                cur = self.cores[cur].parent
            return cur
        return node.parent


def build_topology(config: SimConfig) -> Topology:
    return Topology(config)
