"""Checksum lineage: a per-object digest folded over the write sequence.

The digest is a pure function of the dependency-ordered sequence of
(writer task path, write ordinal) pairs, so two executions produce equal
lineage maps exactly when they ordered every write identically.
"""

from __future__ import annotations

_M64 = (1 << 64) - 1
FRESH = 0


def _fnv64(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode():
        h = ((h ^ b) * 0x100000001B3) & _M64
    return h


def _mix(x: int) -> int:
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def fold(digest: int, writer_path: str, ordinal: int) -> int:
    return _mix(digest ^ _fnv64(writer_path) ^ (ordinal * 0x9E3779B97F4A7C15))
