"""Runtime message vocabulary.

Every message computes its encoded size; the NoC layer segments anything
larger than the fixed wire size into back-to-back wire messages.  Scalar
fields count as one 4-byte word, addresses/sizes as one word, and list
payloads grow with their length.  `dst` is the final destination core;
schedulers forward until it is reached.  Memory requests that must be
resolved by key (region id or address) travel with dst=-1 and are routed by
the scheduler tries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Task argument access flags.
F_IN = 1
F_OUT = 2
F_SAFE = 4
F_REGION = 8
F_NOTRANSFER = 16

OBJ = 0
REG = 1

NO_PRODUCER = -1
HEADER_BYTES = 8


@dataclass(slots=True)
class TaskArg:
    """One dependency argument: an object address or a region id plus flags."""
    target: int
    flags: int

    @property
    def is_region(self) -> bool:
        return bool(self.flags & F_REGION)

    @property
    def mode_rw(self) -> bool:
        return bool(self.flags & F_OUT)

    def validate(self) -> None:
        if not (self.flags & (F_IN | F_OUT)) and not (self.flags & F_SAFE):
            raise ValueError("argument needs IN and/or OUT unless SAFE")


def args_words(args) -> int:
    return 2 * len(args)


def params_words(params) -> int:
    return max(1, len(params))


class Message:
    dst: int

    def words(self) -> int:
        return 2

    def size_bytes(self) -> int:
        return HEADER_BYTES + 4 * self.words()


def _msg(cls):
    """Decorator: dataclass with slots, registered as a runtime message."""
    return dataclass(slots=True)(cls)


# -- task lifecycle ------------------------------------------------------

@_msg
class SpawnReq(Message):
    dst: int
    parent_tid: int
    fn: int
    args: list[TaskArg]
    params: tuple
    spawn_seq: int

    def words(self):
        return 4 + args_words(self.args) + params_words(self.params)


@_msg
class SpawnDelegate(Message):
    dst: int
    parent_tid: int
    parent_resp: int
    fn: int
    args: list[TaskArg]
    params: tuple
    spawn_seq: int
    path: str

    def words(self):
        return 5 + args_words(self.args) + params_words(self.params) + len(self.path) // 4 + 1


@_msg
class SpawnSettled(Message):
    dst: int
    parent_tid: int

    def words(self):
        return 2


@_msg
class WaitReq(Message):
    dst: int
    tid: int
    args: list[TaskArg]

    def words(self):
        return 2 + args_words(self.args)


@_msg
class TaskDone(Message):
    dst: int
    tid: int
    worker: int

    def words(self):
        return 3


@_msg
class Dispatch(Message):
    dst: int
    tid: int
    resp: int
    fn: int
    args: list[TaskArg]
    params: tuple
    path: str
    fetch: list  # (addr, size, producer)

    def words(self):
        return 5 + args_words(self.args) + params_words(self.params) \
            + len(self.path) // 4 + 1 + 3 * len(self.fetch)


@_msg
class Resume(Message):
    dst: int
    tid: int
    fetch: list

    def words(self):
        return 2 + 3 * len(self.fetch)


@_msg
class DispatchCommit(Message):
    dst: int
    tid: int
    worker: int

    def words(self):
        return 3


# -- memory ---------------------------------------------------------------

@_msg
class AllocReq(Message):
    dst: int  # -1: routed by region id
    rid: int
    size: int
    req_id: int
    origin: int
    path: str
    ordinal: int

    def words(self):
        return 6 + len(self.path) // 4 + 1


@_msg
class AllocRpl(Message):
    dst: int
    req_id: int
    addr: int
    fault: str = ""

    def words(self):
        return 4 + len(self.fault) // 4


@_msg
class BallocReq(Message):
    dst: int
    rid: int
    size: int
    num: int
    req_id: int
    origin: int
    path: str
    ordinal: int

    def words(self):
        return 7 + len(self.path) // 4 + 1


@_msg
class BallocRpl(Message):
    dst: int
    req_id: int
    addrs: list[int]
    fault: str = ""

    def words(self):
        return 3 + len(self.addrs) + len(self.fault) // 4


@_msg
class FreeReq(Message):
    dst: int  # -1: routed by address
    addr: int
    req_id: int
    origin: int

    def words(self):
        return 4


@_msg
class FreeRpl(Message):
    dst: int
    req_id: int
    fault: str = ""

    def words(self):
        return 3 + len(self.fault) // 4


@_msg
class ReallocReq(Message):
    dst: int  # -1: routed by old address
    addr: int
    size: int
    new_rid: int
    req_id: int
    origin: int

    def words(self):
        return 6


@_msg
class ReallocRpl(Message):
    dst: int
    req_id: int
    addr: int
    fault: str = ""

    def words(self):
        return 4 + len(self.fault) // 4


@_msg
class RallocReq(Message):
    dst: int  # -1: routed by parent region id
    parent_rid: int
    level_hint: int
    req_id: int
    origin: int

    def words(self):
        return 5


@_msg
class RallocRpl(Message):
    dst: int
    req_id: int
    rid: int
    fault: str = ""

    def words(self):
        return 4 + len(self.fault) // 4


@_msg
class PlaceRegion(Message):
    dst: int
    rid: int
    parent_rid: int
    parent_owner: int
    level_hint: int
    req_id: int
    origin: int

    def words(self):
        return 7


@_msg
class PlacedAck(Message):
    """Climbs from the new region's owner to the top scheduler, installing
    routing entries on the way up; the top scheduler releases the reply."""
    dst: int
    rid: int
    owner: int
    req_id: int
    origin: int

    def words(self):
        return 5


@_msg
class RfreeReq(Message):
    dst: int  # -1: routed by region id
    rid: int
    req_id: int
    origin: int

    def words(self):
        return 4


@_msg
class RfreeRpl(Message):
    dst: int
    req_id: int
    fault: str = ""

    def words(self):
        return 3 + len(self.fault) // 4


@_msg
class RfreeExec(Message):
    dst: int
    rid: int
    req_id: int
    initiator: int

    def words(self):
        return 4


@_msg
class RfreeAck(Message):
    dst: int
    req_id: int
    freed_rids: list[int]

    def words(self):
        return 2 + len(self.freed_rids)


@_msg
class TrieDel(Message):
    """Climbs toward the top scheduler pruning routing entries."""
    dst: int
    rids: list[int]

    def words(self):
        return 1 + len(self.rids)


@_msg
class PageReq(Message):
    dst: int
    req_id: int
    origin_sched: int
    n_pages: int

    def words(self):
        return 4


@_msg
class PageRpl(Message):
    dst: int
    req_id: int
    pages: list[int]

    def words(self):
        return 2 + len(self.pages)


# -- dependency analysis -----------------------------------------------

@_msg
class WalkState:
    """Shared payload of the dependency-walk messages (not itself a message)."""
    tid: int
    resp: int
    arg_idx: int
    is_wait: bool
    rw: bool
    parent_tid: int

    def words(self):
        return 6


@_msg
class DiscoverUp(Message):
    dst: int
    walk: WalkState
    target_kind: int
    target_id: int
    chain: list  # [(kind, id, owner)] accumulated from the target upward
    cur_rid: int

    def words(self):
        return 4 + self.walk.words() + 3 * len(self.chain)


@_msg
class EnqDescend(Message):
    dst: int
    walk: WalkState
    chain: list  # remaining chain, first element handled by the receiver
    from_boundary: bool

    def words(self):
        return 3 + self.walk.words() + 3 * len(self.chain)


@_msg
class EnqSettled(Message):
    dst: int
    tid: int
    arg_idx: int
    is_wait: bool
    parked: bool

    def words(self):
        return 5


@_msg
class ArgTerminal(Message):
    dst: int
    tid: int
    arg_idx: int
    is_wait: bool
    target_kind: int
    target_id: int
    owner: int

    def words(self):
        return 7


@_msg
class ArgReady(Message):
    dst: int
    tid: int
    arg_idx: int
    is_wait: bool

    def words(self):
        return 4


@_msg
class CompleteArg(Message):
    dst: int
    tid: int
    target_kind: int
    target_id: int

    def words(self):
        return 4


@_msg
class DrainNotify(Message):
    dst: int
    parent_rid: int
    elem_kind: int
    elem_id: int
    received: int

    def words(self):
        return 5


@_msg
class WaitReplace(Message):
    dst: int
    tid: int
    target_kind: int
    target_id: int
    rw: bool
    arg_idx: int

    def words(self):
        return 6


# -- packing / scheduling -------------------------------------------------

@_msg
class PackReq(Message):
    dst: int
    req_id: int
    origin_sched: int
    target_kind: int
    target_id: int

    def words(self):
        return 5


@_msg
class PackRpl(Message):
    dst: int
    req_id: int
    entries: list  # (addr, size, producer)

    def words(self):
        return 2 + 3 * len(self.entries)


@_msg
class TaskAssign(Message):
    dst: int
    tid: int
    resp: int
    fn: int
    args: list[TaskArg]
    params: tuple
    path: str
    entries: list  # (addr, size, producer, needs_fetch)

    def words(self):
        return 5 + args_words(self.args) + params_words(self.params) \
            + len(self.path) // 4 + 1 + 4 * len(self.entries)


@_msg
class ProdUpdate(Message):
    dst: int
    req_id: int
    origin_sched: int
    target_kind: int
    target_id: int
    worker: int

    def words(self):
        return 6


@_msg
class ProdAck(Message):
    dst: int
    req_id: int

    def words(self):
        return 2


@_msg
class LoadReport(Message):
    dst: int
    reporter: int
    task_load: int
    region_load: int

    def words(self):
        return 4
