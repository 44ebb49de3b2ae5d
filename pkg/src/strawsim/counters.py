"""Per-block read counters: exact per-WL arrays or Space-Saving entries.

Both backends keep the block-level read count exact. The Space-Saving
backend trades per-WL accuracy for space: with m entries, any query may
overestimate by at most block_rc / m but never underestimates, which is
what keeps approximate counting safe for reclaim decisions.
"""

import logging

import numpy as np

log = logging.getLogger(__name__)

# footprint model widths (bytes): counts saturate at 2**24 - 1
COUNT_BYTES = 3
INDEX_BYTES = 2
COUNT_LIMIT = 2 ** 24 - 1


class ExactRec:
    """One counter per WL plus the block counter."""

    backend = "exact"

    def __init__(self, wls: int):
        self.wls = wls
        self.block_rc = 0
        self.wl_rc = np.zeros(wls, dtype=np.int64)

    def record(self, wl: int) -> None:
        self.block_rc += 1
        self.wl_rc[wl] += 1

    def query(self, wl: int) -> int:
        return int(self.wl_rc[wl])

    def min_estimate(self) -> int:
        return 0

    def reset(self) -> None:
        self.block_rc = 0
        self.wl_rc[:] = 0


class SpaceSavingRec:
    """Space-Saving counters with m entries.

    Replacement rule: on a miss with no free entry, the minimum-count
    entry (ties broken by lowest slot) takes over the new WL index and is
    incremented. Queries for untracked WLs return the minimum count, so
    estimates never undercount. Unassigned slots hold index -1, count 0.
    """

    backend = "space_saving"

    def __init__(self, wls: int, m: int = 32):
        if m < 1:
            raise ValueError("space-saving entry budget must be >= 1")
        self.wls = wls
        self.m = m
        self.block_rc = 0
        self.idx = np.full(m, -1, dtype=np.int64)
        self.cnt = np.zeros(m, dtype=np.int64)
        self._slot: dict[int, int] = {}

    def record(self, wl: int) -> None:
        self.block_rc += 1
        slot = self._slot.get(wl)
        if slot is not None:
            self.cnt[slot] += 1
            return
        if len(self._slot) < self.m:
            slot = len(self._slot)
            self.idx[slot] = wl
            self.cnt[slot] = 1
            self._slot[wl] = slot
            return
        slot = int(np.argmin(self.cnt))   # argmin returns the lowest slot on ties
        old = int(self.idx[slot])
        del self._slot[old]
        self.idx[slot] = wl
        self.cnt[slot] += 1
        self._slot[wl] = slot

    def query(self, wl: int) -> int:
        slot = self._slot.get(wl)
        if slot is not None:
            return int(self.cnt[slot])
        return self.min_estimate()

    def min_estimate(self) -> int:
        if len(self._slot) < self.m:
            return 0
        return int(self.cnt.min())

    def reset(self) -> None:
        self.block_rc = 0
        self.idx[:] = -1
        self.cnt[:] = 0
        self._slot.clear()


def make_rec(backend: str, wls: int, m: int = 32):
    if backend == "exact":
        return ExactRec(wls)
    if backend == "space_saving":
        return SpaceSavingRec(wls, m)
    raise ValueError(f"counters.backend unknown: {backend}")


def rec_memory_footprint(geom, backend: str, m: int = 32) -> int:
    """Modeled counter DRAM (bytes) for the whole device.

    Exact: 3 bytes per WL plus a 3-byte block counter, per block.
    Space-Saving: m entries of (2-byte index + 3-byte count) plus the
    block counter. This is the reporting model, not the allocation the
    simulator actually makes.
    """
    if backend == "exact":
        per_block = geom.wls_per_block * COUNT_BYTES + COUNT_BYTES
    elif backend == "space_saving":
        per_block = m * (INDEX_BYTES + COUNT_BYTES) + COUNT_BYTES
        if m >= geom.wls_per_block:
            log.warning(
                "space-saving budget m=%d >= %d WLs per block; footprint "
                "may exceed exact counting", m, geom.wls_per_block)
    else:
        raise ValueError(f"counters.backend unknown: {backend}")
    return geom.blocks_total * per_block


def footprint_per_48kb_wl(capacity_bytes: int) -> int:
    """Counter DRAM under the per-48-KB-WL counting convention."""
    units = -(-capacity_bytes // (48 * 1024))
    return units * COUNT_BYTES
