"""Per-scheduler routing tables for region ids and address ranges.

Every non-leaf scheduler tracks which child scheduler's subtree owns each
region id and each granted page, so any live id or address resolves from
the top scheduler to exactly one owner.  Lookups answer with the child core
id or None (meaning: not below me, go up).
"""

from __future__ import annotations

from .slab import PAGE_BYTES


class RouteTrie:
    def __init__(self):
        self._regions: dict[int, int] = {}
        self._pages: dict[int, int] = {}

    # -- region ids -----------------------------------------------------

    def add_region(self, rid: int, child: int) -> None:
        self._regions[rid] = child

    def del_region(self, rid: int) -> None:
        self._regions.pop(rid, None)

    def lookup_region(self, rid: int) -> int | None:
        return self._regions.get(rid)

    # -- address ranges ---------------------------------------------------

    def add_pages(self, pages: list[int], child: int) -> None:
        for p in pages:
            self._pages[p] = child

    def lookup_addr(self, addr: int) -> int | None:
        return self._pages.get(addr // PAGE_BYTES)

    def __len__(self) -> int:
        return len(self._regions) + len(self._pages)

    def region_keys(self):
        return self._regions.keys()
