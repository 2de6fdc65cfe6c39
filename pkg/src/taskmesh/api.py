"""Application-facing API: workload programs and the task-side call surface.

Task bodies are generator functions `fn(ctx, *params)`.  Calls that involve
the runtime are yielded and answered by the executor; plain data accesses
(`read`/`write`/payloads) happen inline:

    def body(ctx, n):
        r = yield ctx.ralloc(0, 1)
        a = yield ctx.alloc(64, r)
        yield ctx.compute(500)
        ctx.write(a)
        yield ctx.spawn(1, [arg(a, F_IN | F_OUT)], (n,))
        yield ctx.wait([arg(r, F_IN | F_REGION)])

The same body runs unchanged under the parallel runtime and the serial
oracle.  An argument a body touches must be covered by a declared,
non-SAFE, non-NOTRANSFER argument; parts handed to spawned children are
untouchable until reclaimed with wait().
"""

from __future__ import annotations

from .messages import TaskArg, F_IN, F_OUT, F_SAFE, F_REGION, F_NOTRANSFER, OBJ, REG


def arg(target: int, flags: int) -> TaskArg:
    return TaskArg(target, flags)


def target_key(a: TaskArg) -> tuple:
    return (REG if a.is_region else OBJ, a.target)


class WorkloadProgram:
    """A function table plus the root task that seeds execution."""

    def __init__(self, name: str):
        self.name = name
        self.fns: list = []
        self.fn_names: list[str] = []
        self.root_fn = 0
        self.root_params: tuple = ()

    def add(self, fn, name: str | None = None) -> int:
        self.fns.append(fn)
        self.fn_names.append(name or fn.__name__)
        return len(self.fns) - 1

    def set_root(self, idx: int, params: tuple = ()) -> None:
        self.root_fn = idx
        self.root_params = tuple(params)


class TaskContext:
    """Per-task call surface handed to workload bodies.

    Builds the op records the executor consumes and performs the
    programming-model checks that are identical in both execution modes.
    """

    def __init__(self, observer, path: str, args: list[TaskArg], fn: int):
        self.observer = observer
        self.path = path
        self.args = args
        self.fn = fn
        self.delegated: list[tuple] = []
        self._alloc_ord = 0
        self._spawn_seq = 0
        self._clock = 0  # filled by the parallel worker; serial leaves it 0

    # -- runtime calls (yield these) -----------------------------------

    def compute(self, cycles) -> tuple:
        c = int(cycles)
        if c < 0:
            raise ValueError("negative compute cost")
        return ("compute", c)

    def spawn(self, fn: int, args: list[TaskArg], params: tuple = ()) -> tuple:
        args = list(args)
        for a in args:
            a.validate()
        self.observer.check_spawn(self, args)
        for a in args:
            if not a.flags & F_SAFE:
                self.delegated.append(self.observer.canon_arg(a))
        seq = self._spawn_seq
        self._spawn_seq += 1
        return ("spawn", fn, args, tuple(params), seq)

    def wait(self, args: list[TaskArg]) -> tuple:
        args = list(args)
        for a in args:
            a.validate()
            if a.flags & F_SAFE:
                raise self.observer.fault("cannot wait on a SAFE argument")
        self.observer.check_wait(self, args)
        return ("wait", args)

    def ralloc(self, parent_rid: int, level_hint: int) -> tuple:
        self.observer.check_mutate(self, REG, parent_rid)
        return ("ralloc", parent_rid, level_hint)

    def rfree(self, rid: int) -> tuple:
        self.observer.check_mutate(self, REG, rid)
        return ("rfree", rid)

    def alloc(self, size: int, rid: int) -> tuple:
        if size <= 0:
            raise self.observer.fault("alloc size must be positive")
        self.observer.check_mutate(self, REG, rid)
        ordinal = self._alloc_ord
        self._alloc_ord += 1
        return ("alloc", size, rid, ordinal)

    def balloc(self, size: int, rid: int, num: int) -> tuple:
        if num < 1:
            raise self.observer.fault("balloc needs num >= 1")
        if size <= 0:
            raise self.observer.fault("balloc size must be positive")
        self.observer.check_mutate(self, REG, rid)
        ordinal = self._alloc_ord
        self._alloc_ord += num
        return ("balloc", size, rid, num, ordinal)

    def free(self, addr: int) -> tuple:
        self.observer.check_mutate(self, OBJ, addr)
        return ("free", addr)

    def realloc(self, addr: int, size: int, new_rid: int) -> tuple:
        if size <= 0:
            raise self.observer.fault("realloc size must be positive")
        self.observer.check_mutate(self, OBJ, addr)
        self.observer.check_mutate(self, REG, new_rid)
        return ("realloc", addr, size, new_rid)

    # -- immediate data access -------------------------------------------

    def write(self, addr: int) -> None:
        self.observer.on_access(self, addr, write=True)

    def read(self, addr: int) -> None:
        self.observer.on_access(self, addr, write=False)

    def set_payload(self, addr: int, value) -> None:
        self.observer.on_access(self, addr, write=True)
        self.observer.set_payload(addr, value)

    def get_payload(self, addr: int):
        self.observer.on_access(self, addr, write=False)
        return self.observer.get_payload(addr)

    def metric(self, key: str, value) -> None:
        self.observer.metrics_sink[key] = value

    def now(self) -> int:
        return self._clock

    # -- executor hooks -----------------------------------------------------

    def undelegate(self, args: list[TaskArg]) -> None:
        """Reclaim footprints after a wait completes."""
        keys = [self.observer.canon_arg(a) for a in args]
        keep = []
        for d in self.delegated:
            if not any(self.observer.covers(k, d) for k in keys):
                keep.append(d)
        self.delegated = keep
