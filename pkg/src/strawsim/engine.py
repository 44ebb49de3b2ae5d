"""Deterministic timing engine and top-level simulation driver.

The device is modeled as one FIFO command queue per die plus a shared
transfer resource per channel; commands never preempt each other, so an
erase or a burst of reclaim copies delays every later command on the same
die. That queueing is what turns reclaim policy differences into read
tail-latency differences. All times are integer microseconds.
"""

import hashlib
import json

import numpy as np

from .counters import rec_memory_footprint
from .device import Device
from .disturbance import Rpt
from .ftl import Ftl, RrPolicyConfig
from .geometry import Geometry, TimingParams


class Timeline:
    """Per-die and per-channel busy clocks."""

    def __init__(self, geom: Geometry, timing: TimingParams):
        self.timing = timing
        self.xfer = timing.transfer_us(geom.page_size)
        self.die_free = [0] * geom.dies_total
        self.chan_free = [0] * geom.channels

    def reset(self) -> None:
        self.die_free = [0] * len(self.die_free)
        self.chan_free = [0] * len(self.chan_free)

    def read_page(self, die: int, chan: int, earliest: int) -> int:
        start = max(earliest, self.die_free[die])
        cell_done = start + self.timing.t_read
        self.die_free[die] = cell_done
        xfer_start = max(cell_done, self.chan_free[chan])
        done = xfer_start + self.xfer
        self.chan_free[chan] = done
        return done

    def program_page(self, die: int, chan: int, earliest: int) -> int:
        xfer_start = max(earliest, self.chan_free[chan])
        self.chan_free[chan] = xfer_start + self.xfer
        start = max(xfer_start + self.xfer, self.die_free[die])
        done = start + self.timing.t_prog
        self.die_free[die] = done
        return done

    def erase(self, die: int, earliest: int) -> int:
        start = max(earliest, self.die_free[die])
        done = start + self.timing.t_erase
        self.die_free[die] = done
        return done


def percentile(samples, q: float):
    """Nearest-rank percentile: the ceil(q/100 * N)-th smallest sample.
    Returns None when there are no samples."""
    if not 0 < q <= 100:
        raise ValueError(f"percentile q must be in (0, 100], got {q}")
    n = len(samples)
    if n == 0:
        return None
    rank = -(-int(q * n) // 100)   # ceil(q*n/100)
    return sorted(samples)[rank - 1]


class LatencyStats:
    """Per-request latency samples with exact nearest-rank percentiles."""

    def __init__(self):
        self.samples: list[int] = []

    def add(self, latency_us: int) -> None:
        self.samples.append(latency_us)

    def percentile(self, q: float):
        return percentile(self.samples, q)

    def snapshot(self) -> dict:
        if not self.samples:
            return {"p50": None, "p99": None, "p999": None, "max": None,
                    "mean": None}
        arr = np.sort(np.asarray(self.samples))
        n = len(arr)

        def rank(q):
            return int(arr[-(-(int(q * 10) * n) // 1000) - 1])

        return {
            "p50": rank(50), "p99": rank(99), "p999": rank(99.9),
            "max": int(arr[-1]),
            "mean": round(float(arr.mean()), 3),
        }


class SimStats:
    """Operation counters and the reclaim event log.

    `recording` is off while the device is preconditioned so warm-up
    traffic stays out of the report.
    """

    def __init__(self):
        self.recording = True
        self.reads = 0
        self.writes = 0
        self.programs = 0
        self.gc_copies = 0
        self.rr_copies = {"block_rr": 0, "wl_rr": 0}
        self.erases = 0
        self.corruption_events = 0
        self.read_latency = LatencyStats()
        self.write_latency = LatencyStats()
        self.events = []

    def count_read(self):
        if self.recording:
            self.reads += 1

    def count_write(self):
        if self.recording:
            self.writes += 1

    def count_program(self):
        if self.recording:
            self.programs += 1

    def count_gc_copies(self, n):
        if self.recording:
            self.gc_copies += n

    def count_rr_copies(self, cause, n):
        if self.recording:
            self.rr_copies[cause] += n

    def count_erase(self):
        if self.recording:
            self.erases += 1

    def count_corruption(self):
        # corruption is a safety fact, recorded even during warm-up
        self.corruption_events += 1

    def add_event(self, ev):
        if self.recording:
            self.events.append(ev)


def workload_identity_hash(resolved_config: dict) -> str:
    """Hash of everything that determines the physics and request stream,
    excluding policy/counter choices, so differential runs can be paired."""
    identity = {key: resolved_config.get(key) for key in
                ("geometry", "timing", "reliability", "workload", "seed",
                 "initial_pec", "over_provisioning", "replay_mode")}
    blob = json.dumps(identity, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_simulation(cfg):
    """Construct (device, rpt, ftl, timeline, stats) from a RunConfig."""
    geom = cfg.geometry()
    timing = cfg.timing()
    rel = cfg.reliability()
    device = Device(geom, rel, seed=rel.seed, initial_pec=cfg.initial_pec)
    rpt = cfg.build_rpt(device)
    timeline = Timeline(geom, timing)
    stats = SimStats()
    logical_pages = int(geom.total_pages * (1.0 - cfg.over_provisioning))
    ftl = Ftl(geom, device, rpt, cfg.policy(), timeline, stats,
              logical_pages=logical_pages,
              counter_backend=cfg.counter_backend,
              counter_entries=cfg.counter_entries,
              gc_watermark=cfg.gc_watermark)
    return device, rpt, ftl, timeline, stats


def _final_integrity_scan(device: Device, ftl: Ftl, stats: SimStats) -> None:
    geom = ftl.geom
    for block in range(geom.blocks_total):
        if ftl.valid_count[block] == 0:
            continue
        bad = device.check_integrity(block)
        if not bad:
            continue
        vmask = ftl.valid[block].reshape(geom.wls_per_block,
                                         geom.pages_per_wl).any(axis=1)
        bt = device.blocks[block]
        for wl in bad:
            if vmask[wl] and not bt.reported[wl]:
                bt.reported[wl] = True
                stats.corruption_events += 1


def run_simulation(cfg, records=None) -> dict:
    """Replay a workload through the FTL and return the report dict.

    `records` may carry a pre-built list of trace records; otherwise the
    workload is built from the config (synthetic spec or trace file).
    """
    report, _ = run_simulation_with_events(cfg, records)
    return report


def run_simulation_with_events(cfg, records=None):
    """Like run_simulation but also returns the reclaim/GC event log."""
    device, rpt, ftl, timeline, stats = build_simulation(cfg)
    geom = ftl.geom
    if records is None:
        records = cfg.build_workload(ftl.logical_pages)

    if cfg.precondition:
        # fill the working set so reads hit mapped pages: the synthetic
        # footprint, or the touched range of a trace
        if cfg.resolved["workload"]["trace"]:
            hi = max((rec.offset + rec.length for rec in records), default=0)
        else:
            hi = cfg.synthetic_spec().footprint
        stats.recording = False
        for lpn in range(min(hi, ftl.logical_pages)):
            ftl.host_write(lpn, 0)
        stats.recording = True
        timeline.reset()

    closed = cfg.replay_mode == "closed"
    prev_done = 0
    for rec in records:
        arrival = max(rec.timestamp, prev_done) if closed else rec.timestamp
        last = arrival
        for lpn in range(rec.offset, rec.offset + rec.length):
            lpn %= ftl.logical_pages
            if rec.is_read:
                done = ftl.host_read(lpn, arrival)
            else:
                done = ftl.host_write(lpn, arrival)
            last = max(last, done)
        (stats.read_latency if rec.is_read else stats.write_latency).add(
            last - arrival)
        prev_done = last

    _final_integrity_scan(device, ftl, stats)

    report = {
        "name": cfg.name,
        "workload_hash": workload_identity_hash(cfg.resolved),
        "total_reads": stats.reads,
        "total_writes": stats.writes,
        "rr_page_copies": dict(stats.rr_copies),
        "gc_page_copies": stats.gc_copies,
        "erases": stats.erases,
        "corruption_events": stats.corruption_events,
        "read_latency_us": stats.read_latency.snapshot(),
        "write_latency_us": stats.write_latency.snapshot(),
        "counter_footprint_bytes": rec_memory_footprint(
            geom, cfg.counter_backend, cfg.counter_entries),
        "failed": stats.corruption_events > 0,
        "config": cfg.resolved,
    }
    return report, stats.events
