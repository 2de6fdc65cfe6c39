"""Region tree records and per-target dependency state.

Every region and object carries a dependency queue of tasks waiting for
access in spawn order.  Regions additionally keep, per direct child element
(child region or owned object), pending-traversal marks split by access
mode, a cumulative count of traversals forwarded into that element, and a
cumulative count of traversals received from their own parent; the two
cumulative counts reconcile parent/child drain races between schedulers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ROOT_RID = 0


@dataclass(slots=True)
class QEntry:
    """One dependency-queue entry.

    final is None for a terminal entry (the task wants this target); a
    parked traversal stores its ultimate (kind, id) target and the cached
    remaining chain so resumption needs no re-discovery.
    """
    tid: int
    rw: bool
    resp: int
    arg_idx: int
    is_wait: bool = False
    final: tuple | None = None
    chain: list | None = None
    released: bool = False


@dataclass
class DepState:
    queue: list[QEntry] = field(default_factory=list)
    elem_rw: dict[int, int] = field(default_factory=dict)
    elem_ro: dict[int, int] = field(default_factory=dict)
    enq_sent: dict[int, int] = field(default_factory=dict)
    parent_enq: int = 0
    last_drain: int = 0

    @property
    def child_rw(self) -> int:
        return len(self.elem_rw)

    @property
    def child_ro(self) -> int:
        return len(self.elem_ro)

    def mark_elem(self, elem: int, rw: bool) -> None:
        m = self.elem_rw if rw else self.elem_ro
        m[elem] = m.get(elem, 0) + 1
        self.enq_sent[elem] = self.enq_sent.get(elem, 0) + 1

    def clear_elem(self, elem: int) -> None:
        self.elem_rw.pop(elem, None)
        self.elem_ro.pop(elem, None)

    def quiet(self) -> bool:
        return not self.queue and not self.elem_rw and not self.elem_ro

    def find(self, tid: int) -> QEntry | None:
        for e in self.queue:
            if e.tid == tid:
                return e
        return None


@dataclass
class ObjectMeta:
    oid: int
    addr: int
    size: int
    rid: int
    stable: tuple  # (allocating task path, allocation ordinal)
    last_producer: int = -1
    dep: DepState = field(default_factory=DepState)


@dataclass
class Region:
    rid: int
    parent_rid: int
    parent_owner: int
    level_hint: int
    owner: int
    children: list[int] = field(default_factory=list)
    child_owner: dict[int, int] = field(default_factory=dict)
    objects: dict[int, ObjectMeta] = field(default_factory=dict)
    dep: DepState = field(default_factory=DepState)
    last_producer: int = -1
