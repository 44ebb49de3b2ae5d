"""Trace ingestion and synthetic workload generation.

Trace files are CSV with a header naming at least
device_id,opcode,offset_bytes,length_bytes,timestamp_us (opcode R or W).
Byte ranges are converted to page units (offset rounded down, length
rounded up) and offsets wrap modulo the logical capacity.
"""

import csv
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

log = logging.getLogger(__name__)

TRACE_COLUMNS = ["device_id", "opcode", "offset_bytes", "length_bytes",
                 "timestamp_us"]


class TraceRecord(NamedTuple):
    timestamp: int
    is_read: bool
    offset: int
    length: int


class TraceFormatError(ValueError):
    pass


# Named workload profiles: the two synthetic patterns plus approximations
# of the four cloud-trace profiles (read ratio + pattern class only).
SYNTHETIC_PRESETS = {
    "syn1": {"pattern": "random", "read_ratio": 1.0},
    "syn2": {"pattern": "mixed", "read_ratio": 1.0},
    "ali121": {"pattern": "sequential", "read_ratio": 0.55},
    "ali124": {"pattern": "mixed", "read_ratio": 0.98},
    "ali188": {"pattern": "sequential", "read_ratio": 0.85},
    "ali206": {"pattern": "random", "read_ratio": 0.99},
}

PATTERNS = ("sequential", "random", "mixed", "hotspot")


@dataclass
class SyntheticSpec:
    pattern: str = "random"
    read_ratio: float = 1.0
    footprint: int = 4096
    op_count: int = 20000
    request_size: int = 1
    mix_ratio: float = 0.5          # sequential fraction for "mixed"
    hot_pages: int = 1              # "hotspot" only
    hot_ratio: float = 1.0          # fraction of ops aimed at the hot set
    arrival_interval_us: int = 0    # 0 => closed-loop spacing
    seed: int = 0

    def validate(self) -> None:
        if self.pattern not in PATTERNS:
            raise ValueError(f"workload.pattern unknown: {self.pattern}")
        if not 0.0 <= self.read_ratio <= 1.0:
            raise ValueError("workload.read_ratio must be in [0, 1]")
        if self.footprint < 1 or self.op_count < 0 or self.request_size < 1:
            raise ValueError("workload footprint/op_count/request_size invalid")
        if self.request_size > self.footprint:
            raise ValueError("workload.request_size exceeds footprint")
        if not 0.0 <= self.mix_ratio <= 1.0:
            raise ValueError("workload.mix_ratio must be in [0, 1]")
        if self.hot_pages < 1 or not 0.0 <= self.hot_ratio <= 1.0:
            raise ValueError("workload hotspot parameters invalid")


def generate_synthetic(spec: SyntheticSpec) -> list[TraceRecord]:
    """Deterministic synthetic stream for a given seed."""
    spec.validate()
    n = spec.op_count
    if n == 0:
        return []
    rng = np.random.default_rng(spec.seed)
    reads = rng.random(n) < spec.read_ratio
    span = spec.footprint - spec.request_size + 1

    if spec.pattern == "sequential":
        offsets = (np.arange(n, dtype=np.int64) * spec.request_size) % spec.footprint
    elif spec.pattern == "random":
        offsets = rng.integers(0, span, size=n, dtype=np.int64)
    elif spec.pattern == "hotspot":
        hot = rng.random(n) < spec.hot_ratio
        offsets = rng.integers(0, span, size=n, dtype=np.int64)
        offsets[hot] = rng.integers(0, spec.hot_pages, size=int(hot.sum()),
                                    dtype=np.int64)
    else:  # mixed: sequential runs broken by random jumps
        jump = rng.random(n) >= spec.mix_ratio
        jump[0] = True
        jump_targets = rng.integers(0, span, size=n, dtype=np.int64)
        jump_pos = np.nonzero(jump)[0]
        seg = np.cumsum(jump) - 1
        base = jump_targets[jump_pos][seg]
        start = jump_pos[seg]
        offsets = (base + (np.arange(n) - start) * spec.request_size) % spec.footprint

    timestamps = np.arange(n, dtype=np.int64) * spec.arrival_interval_us
    return [TraceRecord(int(t), bool(r), int(o), spec.request_size)
            for t, r, o in zip(timestamps, reads, offsets)]


def spec_from_config(section: dict) -> SyntheticSpec:
    section = dict(section)
    preset = section.pop("preset", None)
    if preset:
        try:
            section.update(SYNTHETIC_PRESETS[str(preset).lower()])
        except KeyError:
            raise ValueError(f"workload.preset unknown: {preset}")
    known = {f for f in SyntheticSpec.__dataclass_fields__}
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"workload.synthetic unknown keys: {sorted(unknown)}")
    return SyntheticSpec(**section)


def parse_trace(stream, page_size: int, logical_pages: int,
                device_id=None) -> list[TraceRecord]:
    """Parse a trace CSV. Rows for other devices are dropped when
    device_id is given; out-of-monotone timestamps get a warning and a
    stable sort; offsets beyond the logical capacity wrap around."""
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        return []
    missing = [c for c in TRACE_COLUMNS if c not in reader.fieldnames]
    if missing:
        raise TraceFormatError(f"trace header missing columns: {missing}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            dev = int(row["device_id"])
            opcode = row["opcode"].strip()
            offset_bytes = int(row["offset_bytes"])
            length_bytes = int(row["length_bytes"])
            ts = int(row["timestamp_us"])
            if opcode not in ("R", "W"):
                raise ValueError(f"opcode must be R or W, got {opcode!r}")
            if offset_bytes < 0 or length_bytes < 1 or ts < 0:
                raise ValueError("negative offset/timestamp or empty length")
        except (TypeError, ValueError, AttributeError) as exc:
            raise TraceFormatError(f"trace line {lineno}: {exc}")
        if device_id is not None and dev != device_id:
            continue
        offset = (offset_bytes // page_size) % logical_pages
        length = -(-length_bytes // page_size)
        records.append(TraceRecord(ts, opcode == "R", offset, length))
    stamps = [r.timestamp for r in records]
    if any(a > b for a, b in zip(stamps, stamps[1:])):
        log.warning("trace timestamps are not non-decreasing; applying a "
                    "stable sort")
        records.sort(key=lambda r: r.timestamp)
    return records


def write_trace(stream, records, page_size: int, device_id: int = 0) -> None:
    writer = csv.writer(stream)
    writer.writerow(TRACE_COLUMNS)
    for rec in records:
        writer.writerow([device_id, "R" if rec.is_read else "W",
                         rec.offset * page_size, rec.length * page_size,
                         rec.timestamp])
