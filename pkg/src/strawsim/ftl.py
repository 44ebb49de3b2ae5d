"""Page-level FTL with pluggable read-reclaim policies.

Maps logical pages onto the device with an append-only write point per
plane, greedy garbage collection, and one of two reclaim policies:

* BLOCK: when a block's read count reaches a conservative threshold,
  copy out every valid page and erase the block.
* STRAW: every check interval, estimate each valid WL's effective read
  count from the block counters and reclaim only WLs whose budget (with
  worst-case headroom for the next interval) is exhausted.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .counters import make_rec
from .device import Device, WlGroup
from .disturbance import Rpt, disturbed_tenths
from .geometry import Geometry


class SimulationError(RuntimeError):
    pass


@dataclass
class RrPolicyConfig:
    policy: str = "STRAW"                 # "BLOCK" or "STRAW"
    block_rr_threshold: int | None = None  # BLOCK only; derived when None
    check_interval: int = 1000             # STRAW check cadence (block reads)

    def validate(self) -> None:
        if self.policy not in ("BLOCK", "STRAW"):
            raise ValueError(f"policy.policy unknown: {self.policy}")
        if self.block_rr_threshold is not None and self.block_rr_threshold < 1:
            raise ValueError("policy.block_rr_threshold must be >= 1")
        if self.check_interval < 1:
            raise ValueError("policy.check_interval must be >= 1")


@dataclass
class RrEvent:
    timestamp_us: int
    cause: str          # "block_rr" | "wl_rr" | "gc"
    block: int
    wl: int | None
    pages_copied: int


def derive_block_threshold(rpt: Rpt, interval: int = 0) -> int:
    """Conservative block-level reclaim threshold: the fewest reads that
    could exhaust some group's budget if every read landed adjacent to
    that group's weakest WL, optionally minus one check interval of margin."""
    worst = min(e.erc_max * 10 // e.alpha_tenths
                for e in rpt.largest_bucket_entries())
    return max(1, worst - interval)


class Ftl:
    def __init__(self, geom: Geometry, device: Device, rpt: Rpt,
                 policy: RrPolicyConfig, timeline, stats,
                 logical_pages: int, counter_backend: str = "exact",
                 counter_entries: int = 32, gc_watermark: float = 0.02):
        policy.validate()
        self.geom = geom
        self.device = device
        self.rpt = rpt
        self.policy = policy
        self.timeline = timeline
        self.stats = stats
        self.logical_pages = logical_pages
        if logical_pages > geom.total_pages:
            raise ValueError("logical capacity exceeds physical capacity")

        ppb = geom.pages_per_block
        self.l2p = np.full(logical_pages, -1, dtype=np.int64)
        self.p2l = np.full(geom.total_pages, -1, dtype=np.int64)
        self.valid = [np.zeros(ppb, dtype=bool) for _ in range(geom.blocks_total)]
        self.valid_count = np.zeros(geom.blocks_total, dtype=np.int64)

        self.free_pool = [deque(geom.blocks_of_plane(p))
                          for p in range(geom.planes_total)]
        self.active = [-1] * geom.planes_total
        self.next_page = [0] * geom.planes_total
        self._plane_cursor = 0
        self.gc_watermark = max(1, int(round(gc_watermark * geom.blocks_per_plane)))
        self._in_gc = False

        self.recs = [make_rec(counter_backend, geom.wls_per_block,
                              counter_entries)
                     for _ in range(geom.blocks_total)]
        if policy.policy == "BLOCK":
            self.block_threshold = (policy.block_rr_threshold
                                    or derive_block_threshold(
                                        rpt, policy.check_interval))
        else:
            self.block_threshold = None

    # -- host interface ----------------------------------------------------

    def host_read(self, lpn: int, arrival: int) -> int:
        """Issue one page read; returns its completion time. Unmapped
        reads are zero-filled with no device access or stress."""
        self.stats.count_read()
        ppn = int(self.l2p[lpn])
        if ppn < 0:
            return arrival
        geom = self.geom
        block, off = divmod(ppn, geom.pages_per_block)
        wl = off // geom.pages_per_wl
        done = self.timeline.read_page(geom.die_of_block(block),
                                       geom.channel_of_block(block), arrival)
        self.device.apply_read_stress(block, wl)
        bt = self.device.blocks[block]
        if (not bt.reported[wl]
                and self.device.stress_of_tenths(block, wl) > 10 * int(bt.tol[wl])):
            bt.reported[wl] = True
            self.stats.count_corruption()
        rec = self.recs[block]
        rec.record(wl)
        if self.block_threshold is not None:
            if rec.block_rc >= self.block_threshold:
                self.reclaim_block(block, done)
        elif rec.block_rc % self.policy.check_interval == 0:
            self.rr_check(block, done)
        return done

    def host_write(self, lpn: int, arrival: int) -> int:
        self.stats.count_write()
        old = int(self.l2p[lpn])
        if old >= 0:
            self._invalidate(old)
        _, done = self._append_page(lpn, arrival)
        return done

    # -- reclaim -----------------------------------------------------------

    def identify_disturbed_wls(self, block: int) -> list[int]:
        """Valid WLs whose estimated effective read count, plus worst-case
        headroom for the next interval, reaches their group budget."""
        rec = self.recs[block]
        brc = rec.block_rc
        bt = self.device.blocks[block]
        geom = self.geom
        interval = self.policy.check_interval
        vmask = self.valid[block].reshape(geom.wls_per_block,
                                          geom.pages_per_wl).any(axis=1)
        out = []
        last = geom.wls_per_block - 1
        for wl in np.nonzero(vmask)[0]:
            wl = int(wl)
            q_lo = rec.query(wl - 1) if wl > 0 else 0
            q_hi = rec.query(wl + 1) if wl < last else 0
            q_self = rec.query(wl)
            r_adj = q_lo + q_hi
            r_nonadj = max(0, brc - q_lo - q_self - q_hi)
            entry = self.rpt.lookup_entry(bt.pec, WlGroup(int(bt.group[wl])))
            erc10 = 10 * r_nonadj + entry.alpha_tenths * r_adj
            if disturbed_tenths(erc10, entry.erc_max, entry.alpha_tenths,
                                interval):
                out.append(wl)
        return out

    def rr_check(self, block: int, when: int) -> list[RrEvent]:
        events = [self.reclaim_wl(block, wl, when)
                  for wl in self.identify_disturbed_wls(block)]
        if events and self.valid_count[block] == 0:
            self._erase(block, when)
        return events

    def reclaim_wl(self, block: int, wl: int, when: int) -> RrEvent:
        """Copy a heavily-disturbed WL's valid pages out through the normal
        write path. Counters are left untouched: the read history still
        disturbs the WLs that remain valid."""
        geom = self.geom
        start = wl * geom.pages_per_wl
        copied = 0
        for off in range(start, start + geom.pages_per_wl):
            if self.valid[block][off]:
                self._copy_page(block, off, when, exclude=block)
                copied += 1
        self.stats.count_rr_copies("wl_rr", copied)
        ev = RrEvent(when, "wl_rr", block, wl, copied)
        self.stats.add_event(ev)
        return ev

    def reclaim_block(self, block: int, when: int) -> RrEvent:
        copied = self._evacuate(block, when, exclude=block)
        self._erase(block, when)
        self.stats.count_rr_copies("block_rr", copied)
        ev = RrEvent(when, "block_rr", block, None, copied)
        self.stats.add_event(ev)
        return ev

    # -- internals ---------------------------------------------------------

    def _invalidate(self, ppn: int) -> None:
        block, off = divmod(ppn, self.geom.pages_per_block)
        self.valid[block][off] = False
        self.valid_count[block] -= 1
        self.p2l[ppn] = -1

    def _copy_page(self, block: int, off: int, when: int, exclude: int) -> int:
        """Move one valid page: device read then program at the append point."""
        geom = self.geom
        ppn = block * geom.pages_per_block + off
        lpn = int(self.p2l[ppn])
        t_read = self.timeline.read_page(geom.die_of_block(block),
                                         geom.channel_of_block(block), when)
        self._invalidate(ppn)
        _, done = self._append_page(lpn, t_read, exclude=exclude)
        return done

    def _evacuate(self, block: int, when: int, exclude: int) -> int:
        copied = 0
        for off in np.nonzero(self.valid[block])[0]:
            self._copy_page(block, int(off), when, exclude)
            copied += 1
        return copied

    def _erase(self, block: int, when: int) -> None:
        geom = self.geom
        assert self.valid_count[block] == 0
        self.timeline.erase(geom.die_of_block(block), when)
        self.device.erase_block(block)
        self.recs[block].reset()
        self.stats.count_erase()
        plane = geom.plane_of_block(block)
        if self.active[plane] == block:
            self.active[plane] = -1
            self.next_page[plane] = 0
        self.free_pool[plane].append(block)

    def _append_page(self, lpn: int, when: int, exclude: int = -1) -> tuple[int, int]:
        geom = self.geom
        plane = self._pick_plane(exclude)
        block = self.active[plane]
        if block < 0 or self.next_page[plane] >= geom.pages_per_block:
            block = self._alloc_active(plane, when)
        off = self.next_page[plane]
        self.next_page[plane] += 1
        ppn = block * geom.pages_per_block + off
        self.l2p[lpn] = ppn
        self.p2l[ppn] = lpn
        self.valid[block][off] = True
        self.valid_count[block] += 1
        done = self.timeline.program_page(geom.die_of_block(block),
                                          geom.channel_of_block(block), when)
        self.stats.count_program()
        return ppn, done

    def _pick_plane(self, exclude: int) -> int:
        """Round-robin plane choice. Skips the plane whose append point sits
        in `exclude` (a block being reclaimed), and prefers planes that can
        take the page without triggering an emergency GC."""
        planes = self.geom.planes_total
        order = [(self._plane_cursor + i) % planes for i in range(planes)]

        def usable(plane, need_capacity):
            active = self.active[plane]
            has_room = active >= 0 and self.next_page[plane] < self.geom.pages_per_block
            if active == exclude and has_room:
                return False
            if need_capacity:
                return has_room or bool(self.free_pool[plane])
            return True

        for need_capacity in (True, False):
            for plane in order:
                if usable(plane, need_capacity):
                    self._plane_cursor = (plane + 1) % planes
                    return plane
        # every plane's append point is inside the excluded block: retire it
        plane = order[0]
        self.active[plane] = -1
        self.next_page[plane] = 0
        self._plane_cursor = (plane + 1) % planes
        return plane

    def _alloc_active(self, plane: int, when: int) -> int:
        if not self.free_pool[plane]:
            self._gc_plane(plane, when)
        block = self.free_pool[plane].popleft()
        self.active[plane] = block
        self.next_page[plane] = 0
        if len(self.free_pool[plane]) < self.gc_watermark and not self._in_gc:
            self._gc_plane(plane, when)
        return block

    def _gc_plane(self, plane: int, when: int) -> None:
        """Greedy GC: evacuate and erase the min-valid-count full block."""
        reentrant = self._in_gc
        self._in_gc = True
        try:
            victim = self._gc_victim(plane)
            if victim < 0:
                raise SimulationError(
                    f"device full: no GC victim in plane {plane}")
            copied = self._evacuate(victim, when, exclude=victim)
            self._erase(victim, when)
            self.stats.count_gc_copies(copied)
            self.stats.add_event(RrEvent(when, "gc", victim, None, copied))
        finally:
            self._in_gc = reentrant

    def _gc_victim(self, plane: int) -> int:
        best, best_valid = -1, None
        for block in self.geom.blocks_of_plane(plane):
            if block == self.active[plane] or block in self.free_pool[plane]:
                continue
            v = int(self.valid_count[block])
            if v >= self.geom.pages_per_block:
                continue   # nothing to gain
            if best_valid is None or v < best_valid:
                best, best_valid = block, v
        return best

    # -- consistency helpers (used by tests) -------------------------------

    def mapping_is_consistent(self) -> bool:
        for lpn in range(self.logical_pages):
            ppn = int(self.l2p[lpn])
            if ppn >= 0:
                block, off = divmod(ppn, self.geom.pages_per_block)
                if int(self.p2l[ppn]) != lpn or not self.valid[block][off]:
                    return False
        live = int((self.l2p >= 0).sum())
        return live == int(self.valid_count.sum())
