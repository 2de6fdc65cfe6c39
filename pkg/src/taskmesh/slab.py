"""Slab allocator over traded 1 MB pages.

Each scheduler carves its pages into 4 KB slabs on demand.  A slab belongs
to exactly one region and one size class; small objects take power-of-two
slots from 64 B to 2048 B, larger objects take dedicated runs of contiguous
slabs.  Regions hand fully-free slabs back to the scheduler pool once they
hold more than the configured watermark, trading fragmentation for
locality.  Whole pages are the unit schedulers trade with each other;
a page, once carved locally, stays with its scheduler.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

PAGE_BYTES = 1 << 20
SLAB_BYTES = 4096
SLABS_PER_PAGE = PAGE_BYTES // SLAB_BYTES
MIN_CLASS = 64
MAX_CLASS = 2048


class NeedPages(Exception):
    """Raised when an allocation needs pages the scheduler does not hold."""

    def __init__(self, n_pages: int):
        super().__init__(f"need {n_pages} pages")
        self.n_pages = n_pages


def size_class(size: int) -> int:
    """Slot size for a small object; 0 when the object needs whole slabs."""
    if size > MAX_CLASS:
        return 0
    c = MIN_CLASS
    while c < size:
        c *= 2
    return c


@dataclass
class Slab:
    base: int
    rid: int
    slot_size: int  # 0: head of a multi-slab run
    run_slabs: int = 1
    free_slots: list[int] = field(default_factory=list)
    used: int = 0


@dataclass
class RegionPool:
    """Per-region slab bookkeeping, grouped by size class."""
    partial: dict[int, list[Slab]] = field(default_factory=dict)
    slabs: dict[int, Slab] = field(default_factory=dict)  # base -> slab
    free_slabs: list[int] = field(default_factory=list)  # fully-free small-class slabs


class SlabAllocator:
    """One scheduler's slice of the global address space."""

    def __init__(self, watermark: int):
        self.watermark = watermark
        self.uncarved: list[int] = []  # whole pages, tradable
        self.carved: list[int] = []  # pages broken into local slabs
        self.free_slab_bases: list[int] = []  # sorted scheduler-wide pool
        self.region_pools: dict[int, RegionPool] = {}

    # -- page trading -----------------------------------------------------

    def add_pages(self, pages: list[int]) -> None:
        self.uncarved.extend(pages)

    def held_pages(self) -> int:
        return len(self.uncarved) + len(self.carved)

    def take_pages(self, n: int) -> list[int] | None:
        """Give up n whole pages for a child scheduler, if available."""
        if len(self.uncarved) < n:
            return None
        given = self.uncarved[:n]
        del self.uncarved[:n]
        return given

    def _carve_one(self) -> bool:
        if not self.uncarved:
            return False
        p = self.uncarved.pop(0)
        self.carved.append(p)
        base = p * PAGE_BYTES
        for i in range(SLABS_PER_PAGE):
            bisect.insort(self.free_slab_bases, base + i * SLAB_BYTES)
        return True

    # -- region pools ---------------------------------------------------------

    def register_region(self, rid: int) -> None:
        self.region_pools[rid] = RegionPool()

    def drop_region(self, rid: int) -> None:
        """Return every slab of a freed region to the scheduler pool."""
        pool = self.region_pools.pop(rid)
        for base in pool.free_slabs:
            bisect.insort(self.free_slab_bases, base)
        for base, slab in pool.slabs.items():
            n = slab.run_slabs if slab.slot_size == 0 else 1
            for i in range(n):
                bisect.insort(self.free_slab_bases, base + i * SLAB_BYTES)

    # -- allocation --------------------------------------------------------

    def _take_slab(self) -> int:
        if not self.free_slab_bases and not self._carve_one():
            raise NeedPages(1)
        return self.free_slab_bases.pop(0)

    def _take_run(self, n: int) -> int:
        while True:
            bases = self.free_slab_bases
            run = 1
            for i in range(1, len(bases)):
                run = run + 1 if bases[i] == bases[i - 1] + SLAB_BYTES else 1
                if run == n:
                    start = i - n + 1
                    base = bases[start]
                    del bases[start:start + n]
                    return base
            if not self._carve_one():
                raise NeedPages(max(1, -(-n // SLABS_PER_PAGE)))

    def alloc(self, rid: int, size: int) -> int:
        """Allocate an object in the region; raises NeedPages when starved."""
        pool = self.region_pools[rid]
        cls = size_class(size)
        if cls == 0:
            n = -(-size // SLAB_BYTES)
            base = self._take_run(n)
            pool.slabs[base] = Slab(base, rid, 0, run_slabs=n, used=1)
            return base
        avail = pool.partial.get(cls)
        if avail:
            slab = avail[-1]
        else:
            base = pool.free_slabs.pop() if pool.free_slabs else self._take_slab()
            slab = Slab(base, rid, cls,
                        free_slots=list(range(SLAB_BYTES // cls - 1, -1, -1)))
            pool.slabs[base] = slab
            pool.partial.setdefault(cls, []).append(slab)
        slot = slab.free_slots.pop()
        slab.used += 1
        if not slab.free_slots:
            pool.partial[cls].remove(slab)
        return slab.base + slot * slab.slot_size

    def free(self, rid: int, addr: int, size: int) -> None:
        pool = self.region_pools[rid]
        cls = size_class(size)
        if cls == 0:
            slab = pool.slabs.pop(addr)
            for i in range(slab.run_slabs):
                bisect.insort(self.free_slab_bases, addr + i * SLAB_BYTES)
            return
        base = addr - (addr % SLAB_BYTES)
        slab = pool.slabs[base]
        slot = (addr - base) // slab.slot_size
        assert slot not in slab.free_slots, "double free inside slab"
        had_room = bool(slab.free_slots)
        slab.free_slots.append(slot)
        slab.used -= 1
        if slab.used == 0:
            if had_room:
                pool.partial[slab.slot_size].remove(slab)
            del pool.slabs[base]
            pool.free_slabs.append(base)
            # Watermark trade: excess empty slabs go back to the scheduler.
            while len(pool.free_slabs) > self.watermark:
                bisect.insort(self.free_slab_bases, pool.free_slabs.pop(0))
        elif not had_room:
            pool.partial.setdefault(slab.slot_size, []).append(slab)
