"""Omniscient verification instrument shared by both execution modes.

The observer mirrors the region tree and object table, folds the checksum
lineage, and enforces the programming-model rules (declared footprints,
delegation discipline).  Under the parallel runtime it additionally audits
global safety properties the distributed state must uphold: conflict-free
dispatch, producer coherence of fetch lists, and soundness of every
counter-gated release.  It is an instrument: runtime decisions never read
observer state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lineage
from .engine import SimFault
from .messages import OBJ, REG, F_IN, F_OUT, F_SAFE, F_NOTRANSFER, NO_PRODUCER


@dataclass
class ORegion:
    rid: int
    parent: int | None
    children: list[int] = field(default_factory=list)
    objects: list[int] = field(default_factory=list)
    alive: bool = True


@dataclass
class OObject:
    oid: int
    addr: int
    size: int
    rid: int
    stable: tuple
    alive: bool = True


class Observer:
    def __init__(self, audit: bool = True):
        self.audit = audit
        self.regions: dict[int, ORegion] = {0: ORegion(0, None)}
        self.objects: dict[int, OObject] = {}
        self.addr2oid: dict[int, int] = {}
        self.digests: dict[tuple, int] = {}
        self.payloads: dict[tuple, object] = {}
        self.producers: dict[int, int] = {}
        self.metrics_sink: dict = {}
        self._write_ord: dict[tuple, int] = {}
        # Parallel-mode audit state.
        self.dispatched: dict[int, tuple] = {}  # tid -> (path, args, worker)
        self.task_ctx: dict[int, object] = {}
        self.active_walks: dict[int, tuple] = {}  # wid -> (rw, pos_key, target_key)
        self.dep_states: dict[tuple, object] = {}  # (kind, id) -> DepState
        self.violations: list[str] = []
        self.reconciles_deferred = 0
        self.reconciles_applied = 0
        self.drains_sent = 0

    # -- faults ----------------------------------------------------------

    def fault(self, msg: str) -> SimFault:
        return SimFault(msg)

    # -- mirror maintenance -------------------------------------------------

    def on_ralloc(self, rid: int, parent_rid: int) -> None:
        self.regions[rid] = ORegion(rid, parent_rid)
        self.regions[parent_rid].children.append(rid)

    def on_rfree(self, rid: int) -> None:
        reg = self.regions[rid]
        reg.alive = False
        parent = self.regions[reg.parent]
        if rid in parent.children:
            parent.children.remove(rid)
        for oid in reg.objects:
            if self.objects[oid].alive:
                self._kill_object(oid)
        for child in list(reg.children):
            self.on_rfree(child)

    def on_alloc(self, oid: int, addr: int, size: int, rid: int,
                 stable: tuple, worker: int) -> None:
        self.objects[oid] = OObject(oid, addr, size, rid, stable)
        self.addr2oid[addr] = oid
        self.regions[rid].objects.append(oid)
        self.digests.setdefault(stable, lineage.FRESH)
        self.producers[oid] = worker

    def on_free(self, oid: int) -> None:
        self._kill_object(oid)

    def on_realloc(self, oid: int, new_addr: int, new_rid: int, new_size: int) -> None:
        obj = self.objects[oid]
        del self.addr2oid[obj.addr]
        self.regions[obj.rid].objects.remove(oid)
        obj.addr, obj.rid, obj.size = new_addr, new_rid, new_size
        self.addr2oid[new_addr] = oid
        self.regions[new_rid].objects.append(oid)

    def _kill_object(self, oid: int) -> None:
        obj = self.objects[oid]
        obj.alive = False
        del self.addr2oid[obj.addr]
        self.producers.pop(oid, None)

    # -- containment -----------------------------------------------------------

    def _ancestors(self, kind: int, xid: int) -> list[tuple]:
        """Keys of the target plus every enclosing region, innermost first."""
        keys = [(kind, xid)]
        rid = None
        if kind == OBJ:
            obj = self.objects.get(xid)
            if obj is not None:
                rid = obj.rid
        else:
            reg = self.regions.get(xid)
            if reg is not None:
                rid = reg.parent if xid != 0 else None
        while rid is not None:
            keys.append((REG, rid))
            rid = self.regions[rid].parent if rid != 0 else None
        return keys

    def covers(self, outer: tuple, inner: tuple) -> bool:
        return outer in self._ancestors(*inner)

    def expand(self, key: tuple) -> set[int]:
        """Live object ids under a target key."""
        kind, xid = key
        if kind == OBJ:
            obj = self.objects.get(xid)
            return {xid} if obj is not None and obj.alive else set()
        out: set[int] = set()
        reg = self.regions.get(xid)
        if reg is None or not reg.alive:
            return out
        stack = [xid]
        while stack:
            r = self.regions[stack.pop()]
            for oid in r.objects:
                if self.objects[oid].alive:
                    out.add(oid)
            stack.extend(r.children)
        return out

    def _resolve_addr(self, addr: int) -> OObject:
        oid = self.addr2oid.get(addr)
        if oid is None:
            raise self.fault(f"access to unknown or freed address {addr:#x}")
        return self.objects[oid]

    def canon_arg(self, a) -> tuple:
        """Canonical (kind, id) key: regions by id, objects by oid."""
        if a.is_region:
            if a.target not in self.regions or not self.regions[a.target].alive:
                raise self.fault(f"argument names unknown region {a.target}")
            return (REG, a.target)
        return (OBJ, self._resolve_addr(a.target).oid)

    # -- programming-model checks (both modes) ------------------------------

    def _covering_args(self, ctx, kind: int, xid: int):
        anc = set(self._ancestors(kind, xid))
        out = []
        for a in ctx.args:
            if a.flags & F_SAFE:
                continue
            if self.canon_arg(a) in anc:
                out.append(a)
        return out

    def _check_delegated(self, ctx, kind: int, xid: int, what: str) -> None:
        anc = self._ancestors(kind, xid)
        for d in ctx.delegated:
            if d in anc:
                raise self.fault(
                    f"task {ctx.path}: {what} on {d} delegated to a child "
                    f"(wait() first)")

    def _mode_covered(self, ctx, a) -> bool:
        kind, xid = self.canon_arg(a)
        for c in self._covering_args(ctx, kind, xid):
            if c.flags & F_OUT:
                return True
            if not a.mode_rw and c.flags & F_IN:
                return True
        return False

    def check_spawn(self, ctx, args) -> None:
        dep = [a for a in args if not a.flags & F_SAFE]
        keys = []
        for a in dep:
            k = self.canon_arg(a)
            if k in keys:
                raise self.fault(f"task {ctx.path}: duplicate spawn argument {k}")
            keys.append(k)
        for i, ka in enumerate(keys):
            for kb in keys[i + 1:]:
                if self.covers(ka, kb) or self.covers(kb, ka):
                    raise self.fault(
                        f"task {ctx.path}: nested spawn arguments {ka} and {kb} "
                        f"(mark the inner one SAFE)")
        if ctx.path == "r":
            return
        for a in dep:
            if not self._mode_covered(ctx, a):
                raise self.fault(
                    f"task {ctx.path}: spawn argument {self.canon_arg(a)} outside "
                    f"the task's declared footprint")

    def check_wait(self, ctx, args) -> None:
        if ctx.path == "r":
            return
        for a in args:
            if not self._mode_covered(ctx, a):
                raise self.fault(
                    f"task {ctx.path}: wait argument {self.canon_arg(a)} outside "
                    f"the task's declared footprint")

    def check_mutate(self, ctx, kind: int, xid: int) -> None:
        """Allocation-family calls need OUT coverage of the touched region."""
        if kind == OBJ:
            obj = self._resolve_addr(xid)
            kind, xid = OBJ, obj.oid
        elif xid not in self.regions or not self.regions[xid].alive:
            raise self.fault(f"task {ctx.path}: call names unknown region {xid}")
        self._check_delegated(ctx, kind, xid, "allocation call")
        if ctx.path == "r":
            return
        cover = self._covering_args(ctx, kind, xid)
        if not any(c.flags & F_OUT for c in cover):
            raise self.fault(
                f"task {ctx.path}: allocation call on {(kind, xid)} without "
                f"OUT coverage")

    def on_access(self, ctx, addr: int, write: bool) -> None:
        obj = self._resolve_addr(addr)
        self._check_delegated(ctx, OBJ, obj.oid, "data access")
        if ctx.path != "r":
            cover = [c for c in self._covering_args(ctx, OBJ, obj.oid)
                     if not c.flags & F_NOTRANSFER]
            need = F_OUT if write else F_IN
            if not any(c.flags & need for c in cover):
                kind = "write" if write else "read"
                raise self.fault(
                    f"task {ctx.path}: undeclared {kind} of object {obj.oid}")
        if write:
            k = (ctx.path, obj.oid)
            self._write_ord[k] = self._write_ord.get(k, 0) + 1
            self.digests[obj.stable] = lineage.fold(
                self.digests[obj.stable], ctx.path, self._write_ord[k])

    def set_payload(self, addr: int, value) -> None:
        self.payloads[self._resolve_addr(addr).stable] = value

    def get_payload(self, addr: int):
        return self.payloads.get(self._resolve_addr(addr).stable)

    def lineage_map(self) -> dict:
        return dict(self.digests)

    # -- parallel-mode audits ------------------------------------------------

    def register_state(self, kind: int, xid: int, dep) -> None:
        self.dep_states[(kind, xid)] = dep

    def drop_state(self, kind: int, xid: int) -> None:
        self.dep_states.pop((kind, xid), None)

    def walk_begin(self, wid: int, rw: bool, target: tuple) -> None:
        self.active_walks[wid] = (rw, None, target)

    def walk_pos(self, wid: int, pos: tuple) -> None:
        rw, _old, target = self.active_walks[wid]
        self.active_walks[wid] = (rw, pos, target)

    def walk_end(self, wid: int) -> None:
        self.active_walks.pop(wid, None)

    def _effective(self, tid: int, path: str, args) -> tuple[set[int], set[int]]:
        rw: set[int] = set()
        ro: set[int] = set()
        for a in args:
            if a.flags & F_SAFE:
                continue
            oids = self.expand(self.canon_arg(a))
            (rw if a.mode_rw else ro).update(oids)
        ctx = self.task_ctx.get(tid)
        if ctx is not None:
            for d in ctx.delegated:
                sub = self.expand(d)
                rw -= sub
                ro -= sub
        return rw, ro

    def on_dispatch(self, tid: int, path: str, args, entries, worker: int) -> None:
        """Called by a leaf scheduler as it hands a task to a worker."""
        if self.audit:
            rw, ro = self._effective(tid, path, args)
            for otid, (opath, oargs, _w) in self.dispatched.items():
                orw, oro = self._effective(otid, opath, oargs)
                bad = (rw & (orw | oro)) or (ro & orw)
                if bad:
                    raise AssertionError(
                        f"conflicting dispatch: {path} vs {opath} share objects "
                        f"{sorted(bad)} with write access")
            for addr, size, producer, fetch in entries:
                if not fetch:
                    continue
                oid = self.addr2oid.get(addr)
                while oid is not None:
                    obj = self.objects[oid]
                    have = self.producers.get(oid, NO_PRODUCER)
                    if have != producer:
                        raise AssertionError(
                            f"stale producer for object {oid}: fetch says "
                            f"{producer}, dependency order says {have}")
                    nxt = obj.addr + obj.size
                    if nxt >= addr + size:
                        break
                    oid = self.addr2oid.get(nxt)
        self.dispatched[tid] = (path, args, worker)
        for a in args:
            if a.flags & F_SAFE or not a.mode_rw:
                continue
            for oid in self.expand(self.canon_arg(a)):
                self.producers[oid] = worker

    def on_task_start(self, tid: int, ctx) -> None:
        self.task_ctx[tid] = ctx

    def on_task_complete(self, tid: int) -> None:
        self.dispatched.pop(tid, None)

    def on_release(self, kind: int, xid: int, rw: bool) -> None:
        """A counter-gated release happened; nothing conflicting may remain
        below the released target."""
        if not self.audit or kind == OBJ:
            return
        key = (REG, xid)
        for (skind, sid), dep in self.dep_states.items():
            if (skind, sid) == key or not self.covers(key, (skind, sid)):
                continue
            for e in dep.queue:
                if rw or e.rw:
                    raise AssertionError(
                        f"release at region {xid} while task {e.tid} still "
                        f"queued below at {(skind, sid)}")
        for wid, (wrw, pos, _target) in self.active_walks.items():
            if pos is None or pos == key:
                continue
            if (rw or wrw) and self.covers(key, pos):
                raise AssertionError(
                    f"release at region {xid} while a traversal is in flight "
                    f"below at {pos}")

    def check_quiescent(self) -> None:
        assert not self.active_walks, f"stuck traversals: {self.active_walks}"
        assert not self.dispatched, f"tasks never completed: {sorted(self.dispatched)}"
        for (kind, xid), dep in self.dep_states.items():
            assert not dep.queue, f"non-empty queue at {(kind, xid)}: {dep.queue}"
            assert not dep.elem_rw and not dep.elem_ro, (
                f"leaked child counters at {(kind, xid)}")
            assert dep.parent_enq == dep.last_drain, (
                f"unreconciled drains at {(kind, xid)}")
