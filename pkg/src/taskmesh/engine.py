"""Discrete-event core: event queue, NoC channels with credit flow, DMA groups.

Events are totally ordered by (fire_at, seq) where seq is assigned at
scheduling time, so a run is a pure function of its configuration.  Channels
exist only between tree peers; every channel is FIFO: wire latency is fixed
per channel and stalled messages queue in send order, so delivery order
always equals send order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .config import SimConfig
from .topology import Topology, Role

EV_WIRE = 0
EV_PROC = 1
EV_CREDIT = 2
EV_DMA = 3
EV_TASK = 4
EV_BOOT = 5
EV_GROUP_DONE = 6

PENDING = 0
FAILED = 1
DONE = 2


class SimFault(RuntimeError):
    """Programming-model violation detected by the runtime."""


class DeadlockError(RuntimeError):
    """Cycle budget exceeded; carries a pending-event dump."""

    def __init__(self, message: str, dump: str):
        super().__init__(message + "\n" + dump)
        self.dump = dump


@dataclass
class DmaTransfer:
    src_core: int
    dst_core: int
    src_addr: int
    dst_addr: int
    size: int


@dataclass
class DmaGroup:
    group_id: int
    transfers: list[DmaTransfer]
    completion_target: int
    tag: object = None
    status: list[int] = field(default_factory=list)
    retries: int = 0

    def __post_init__(self):
        self.status = [PENDING] * len(self.transfers)

    @property
    def done(self) -> bool:
        return all(s == DONE for s in self.status)


class Channel:
    """Directed peer-to-peer software buffer with credit flow control.

    The sender never pushes without a credit; out-of-credit wire messages
    wait in a local FIFO.  The receiver returns credits once it has consumed
    the logical message the segments belong to.
    """

    __slots__ = ("src", "dst", "credits", "capacity", "pending", "latency",
                 "wire_sent", "wire_recv", "bytes_sent", "bytes_recv")

    def __init__(self, src: int, dst: int, capacity: int, latency: int):
        self.src = src
        self.dst = dst
        self.capacity = capacity
        self.credits = capacity
        self.pending: list = []
        self.latency = latency
        self.wire_sent = 0
        self.wire_recv = 0
        self.bytes_sent = 0
        self.bytes_recv = 0


class Engine:
    """Event loop plus the NoC model shared by all cores."""

    def __init__(self, config: SimConfig, topo: Topology):
        self.config = config
        self.topo = topo
        self.lat = config.latency
        self.now = 0
        self._seq = 0
        self._heap: list = []
        self.cores: list = [None] * len(topo.cores)
        self.channels: dict[tuple[int, int], Channel] = {}
        for core in topo.cores:
            for peer in topo.peers_of(core.id):
                lat = self.lat.msg_latency(topo.hops(core.id, peer))
                self.channels[(core.id, peer)] = Channel(
                    core.id, peer, config.buffer_slots, lat)
        self._dma_gid = 0
        self.dma_fault_hook = None  # callable(group, idx, attempt) -> bool
        self.trace_hook = None
        self.observer = None
        # Per-core traffic counters.
        n = len(topo.cores)
        self.msgs_sent = [0] * n
        self.msgs_recv = [0] * n
        self.bytes_sent = [0] * n
        self.bytes_recv = [0] * n
        self.dma_in = [0] * n
        self.dma_out = [0] * n
        self.fault: SimFault | None = None

    # -- event queue ----------------------------------------------------

    def schedule(self, at: int, kind: int, payload) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, kind, payload))

    def trace(self, core: int, kind: str, detail: str) -> None:
        if self.trace_hook is not None:
            self.trace_hook(self.now, core, kind, detail)

    def run(self) -> int:
        """Process events until quiescence; returns the final cycle."""
        budget = self.config.cycle_budget
        heap = self._heap
        while heap:
            at, _seq, kind, payload = heapq.heappop(heap)
            if at > budget:
                raise DeadlockError(
                    f"cycle budget {budget} exceeded at event time {at}",
                    self._dump())
            self.now = at
            if kind == EV_WIRE:
                self._wire_arrive(payload)
            elif kind == EV_PROC:
                self.cores[payload].process_next(at)
            elif kind == EV_CREDIT:
                self._credit_arrive(payload)
            elif kind == EV_DMA:
                self._dma_arrive(payload)
            elif kind == EV_TASK:
                core, token = payload
                self.cores[core].on_task_event(at, token)
            elif kind == EV_GROUP_DONE:
                group = payload
                self.cores[group.completion_target].on_dma_group_done(group, at)
            elif kind == EV_BOOT:
                self.cores[payload].on_boot(at)
            if self.fault is not None:
                raise self.fault
        return self.now

    def _dump(self) -> str:
        lines = ["pending events per core:"]
        per_core: dict[int, int] = {}
        for at, _s, kind, payload in self._heap:
            tgt = -1
            if kind == EV_PROC or kind == EV_BOOT:
                tgt = payload
            elif kind == EV_TASK:
                tgt = payload[0]
            elif kind == EV_WIRE:
                tgt = payload[0].dst
            per_core[tgt] = per_core.get(tgt, 0) + 1
        for cid in sorted(per_core):
            lines.append(f"  core {cid}: {per_core[cid]} events")
        for core in self.cores:
            if core is not None and hasattr(core, "debug_state"):
                lines.append(core.debug_state())
        return "\n".join(lines)

    # -- messages ---------------------------------------------------------

    def send(self, src: int, dst: int, msg, at: int) -> None:
        """Send a logical runtime message between tree peers.

        Messages larger than the fixed wire size are segmented; the logical
        message is delivered when its final segment arrives.
        """
        chan = self.channels.get((src, dst))
        assert chan is not None, f"cores {src} and {dst} are not hierarchy peers"
        size = msg.size_bytes()
        wire_size = self.config.msg_size
        n_seg = max(1, -(-size // wire_size))
        self.msgs_sent[src] += 1
        self.trace(src, "send", f"{msg.__class__.__name__}->{dst}")
        for i in range(n_seg):
            seg_bytes = min(wire_size, size - i * wire_size) if size else wire_size
            wire = (msg, i == n_seg - 1, seg_bytes, n_seg)
            if chan.credits > 0:
                chan.credits -= 1
                self._wire_depart(chan, wire, at)
            else:
                chan.pending.append((wire, at))

    def _wire_depart(self, chan: Channel, wire, at: int) -> None:
        chan.wire_sent += 1
        chan.bytes_sent += self.config.msg_size
        self.bytes_sent[chan.src] += self.config.msg_size
        self.schedule(at + chan.latency, EV_WIRE, (chan, wire))

    def _wire_arrive(self, payload) -> None:
        chan, wire = payload
        msg, final, _seg_bytes, n_seg = wire
        chan.wire_recv += 1
        chan.bytes_recv += self.config.msg_size
        self.bytes_recv[chan.dst] += self.config.msg_size
        if final:
            self.msgs_recv[chan.dst] += 1
            self.trace(chan.dst, "recv", f"{msg.__class__.__name__}<-{chan.src}")
            self.cores[chan.dst].deliver(chan.src, msg, self.now, n_seg)

    def return_credits(self, dst: int, src: int, k: int, at: int) -> None:
        """Receiver `dst` releases k buffer slots back toward sender `src`."""
        chan = self.channels[(src, dst)]
        self.schedule(at + chan.latency, EV_CREDIT, (chan, k))

    def _credit_arrive(self, payload) -> None:
        chan, k = payload
        chan.credits += k
        assert chan.credits <= chan.capacity, "credit overflow"
        while chan.pending and chan.credits > 0:
            wire, _sent_at = chan.pending.pop(0)
            chan.credits -= 1
            self._wire_depart(chan, wire, self.now)

    # -- DMA ---------------------------------------------------------------

    def new_group(self, transfers: list[DmaTransfer], target: int, tag=None) -> DmaGroup:
        self._dma_gid += 1
        return DmaGroup(self._dma_gid, transfers, target, tag)

    def issue_dma_group(self, group: DmaGroup, at: int) -> None:
        if not group.transfers:
            self.schedule(at, EV_GROUP_DONE, group)
            return
        for idx, tr in enumerate(group.transfers):
            self._issue_transfer(group, idx, tr, at, 1)

    def _issue_transfer(self, group, idx, tr, at, attempt) -> None:
        lat = self.lat.dma_latency(tr.size, self.topo.hops(tr.src_core, tr.dst_core))
        self.schedule(at + lat, EV_DMA, (group, idx, attempt))

    def _dma_arrive(self, payload) -> None:
        group, idx, attempt = payload
        tr = group.transfers[idx]
        hook = self.dma_fault_hook
        if hook is not None and hook(group, idx, attempt):
            group.status[idx] = FAILED
            group.retries += 1
            self.trace(tr.dst_core, "dma_retry", f"g{group.group_id}[{idx}]")
            self._issue_transfer(group, idx, tr, self.now, attempt + 1)
            return
        group.status[idx] = DONE
        self.dma_out[tr.src_core] += tr.size
        self.dma_in[tr.dst_core] += tr.size
        self.trace(tr.dst_core, "dma_done", f"g{group.group_id}[{idx}] {tr.size}B")
        if group.done:
            self.schedule(self.now, EV_GROUP_DONE, group)

    # -- invariants ----------------------------------------------------------

    def check_conservation(self) -> None:
        """Post-quiescence conservation: no bytes or credits in flight."""
        total_sent = total_recv = 0
        for chan in self.channels.values():
            assert chan.bytes_sent == chan.bytes_recv, (
                f"channel {chan.src}->{chan.dst} lost bytes")
            assert not chan.pending, f"channel {chan.src}->{chan.dst} has stuck messages"
            assert chan.credits == chan.capacity, (
                f"channel {chan.src}->{chan.dst} leaked credits")
            total_sent += chan.bytes_sent
            total_recv += chan.bytes_recv
        assert total_sent == total_recv
        assert sum(self.dma_in) == sum(self.dma_out)
