"""Single-threaded serial executor: the ground-truth oracle.

Runs the identical workload program in strict program order: a spawn
executes the child task inline at the spawn point (depth-first), so waits
resolve trivially.  Memory management is a flat bump allocator over the
same observer mirror; all programming-model checks are the shared ones, so
a program that faults here faults identically under the parallel runtime.
"""

from __future__ import annotations

from .api import TaskContext, WorkloadProgram
from .engine import SimFault
from .observer import Observer
from .regions import ROOT_RID

_ALIGN = 64


class _SerialMemory:
    def __init__(self, observer: Observer):
        self.obs = observer
        self.next_rid = 1
        self.next_oid = 1
        self.next_addr = _ALIGN

    def ralloc(self, parent_rid: int) -> int:
        if parent_rid not in self.obs.regions or not self.obs.regions[parent_rid].alive:
            raise SimFault(f"ralloc under unknown region {parent_rid}")
        rid = self.next_rid
        self.next_rid += 1
        self.obs.on_ralloc(rid, parent_rid)
        return rid

    def rfree(self, rid: int) -> None:
        if rid == ROOT_RID:
            raise SimFault("the root region cannot be freed")
        if rid not in self.obs.regions or not self.obs.regions[rid].alive:
            raise SimFault(f"rfree of unknown region {rid}")
        self.obs.on_rfree(rid)

    def alloc(self, size: int, rid: int, path: str, ordinal: int) -> int:
        if rid not in self.obs.regions or not self.obs.regions[rid].alive:
            raise SimFault(f"alloc into unknown region {rid}")
        addr = self.next_addr
        self.next_addr += -(-size // _ALIGN) * _ALIGN
        oid = self.next_oid
        self.next_oid += 1
        self.obs.on_alloc(oid, addr, size, rid, (path, ordinal), -1)
        return addr

    def free(self, addr: int) -> None:
        oid = self.obs.addr2oid.get(addr)
        if oid is None:
            raise SimFault(f"free of unknown address {addr:#x}")
        self.obs.on_free(oid)

    def realloc(self, addr: int, size: int, new_rid: int) -> int:
        oid = self.obs.addr2oid.get(addr)
        if oid is None:
            raise SimFault(f"realloc of unknown address {addr:#x}")
        if new_rid not in self.obs.regions or not self.obs.regions[new_rid].alive:
            raise SimFault(f"realloc into unknown region {new_rid}")
        new_addr = self.next_addr
        self.next_addr += -(-size // _ALIGN) * _ALIGN
        self.obs.on_realloc(oid, new_addr, new_rid, size)
        return new_addr


def run_serial(program: WorkloadProgram, observer: Observer | None = None):
    """Execute depth-first in program order.

    Returns (lineage map, task order, observer).
    """
    obs = observer or Observer()
    mem = _SerialMemory(obs)
    order: list[str] = []

    def exec_task(fn: int, args, params: tuple, path: str) -> None:
        order.append(path)
        ctx = TaskContext(obs, path, args, fn)
        gen = program.fns[fn](ctx, *params)
        value = None
        while True:
            try:
                op = gen.send(value)
            except StopIteration:
                return
            value = None
            tag = op[0]
            if tag == "compute":
                pass
            elif tag == "spawn":
                _t, cfn, cargs, cparams, seq = op
                exec_task(cfn, cargs, cparams, f"{path}.{seq}")
            elif tag == "wait":
                ctx.undelegate(op[1])
            elif tag == "ralloc":
                value = mem.ralloc(op[1])
            elif tag == "rfree":
                mem.rfree(op[1])
            elif tag == "alloc":
                _t, size, rid, ordinal = op
                value = mem.alloc(size, rid, path, ordinal)
            elif tag == "balloc":
                _t, size, rid, num, ordinal = op
                value = [mem.alloc(size, rid, path, ordinal + i) for i in range(num)]
            elif tag == "free":
                mem.free(op[1])
            elif tag == "realloc":
                _t, addr, size, new_rid = op
                value = mem.realloc(addr, size, new_rid)
            else:
                raise SimFault(f"unknown task op {tag!r}")

    exec_task(program.root_fn, [], program.root_params, "r")
    return obs.lineage_map(), order, obs
