"""Ground-truth read-disturbance physics.

Each wordline carries a hidden tolerance (an effective-read-count budget)
and a hidden disturbance rate. Reads to a block stress every non-target
WL: by 1 unit for non-adjacent targets and by the WL's own rate for the
two targets adjacent to it. A WL whose accumulated stress exceeds its
tolerance is corrupted. This module is the safety oracle that policies
are judged against; policies never see these values directly.

All stress arithmetic is integer: disturbance rates are fixed-point with
one decimal (stored as tenths), so stress is tracked in tenths of an
effective read and comparisons are exact.
"""

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .geometry import Geometry


class WlGroup(IntEnum):
    BEST = 0
    GOOD = 1
    BAD = 2
    WORST = 3


GROUP_NAMES = {g: g.name.capitalize() for g in WlGroup}
GROUPS_BY_NAME = {name: g for g, name in GROUP_NAMES.items()}


@dataclass
class ReliabilityConfig:
    """Parameters for sampling per-WL ground truth."""

    tolerance_min: int = 403_000
    tolerance_max: int = 962_000
    alpha_mean: float = 8.4
    alpha_spread: float = 0.1
    distribution: str = "uniform"   # or "truncated-normal"
    symmetric_mode: bool = False
    # tolerance scale factor per PEC bucket, keyed by bucket upper bound
    pec_degradation: dict = field(default_factory=lambda: {1000: 1.0, 2000: 0.85})
    seed: int = 0

    def validate(self) -> None:
        if self.tolerance_min > self.tolerance_max:
            raise ValueError("reliability.tolerance_min must be <= tolerance_max")
        if self.tolerance_min < 1:
            raise ValueError("reliability.tolerance_min must be >= 1")
        if self.alpha_mean < 1.0:
            raise ValueError("reliability.alpha_mean must be >= 1")
        if not 0.0 <= self.alpha_spread < 1.0:
            raise ValueError("reliability.alpha_spread must be in [0, 1)")
        if self.distribution not in ("uniform", "truncated-normal"):
            raise ValueError(f"reliability.distribution unknown: {self.distribution}")
        if not self.pec_degradation:
            raise ValueError("reliability.pec_degradation must not be empty")
        for bucket, factor in self.pec_degradation.items():
            if bucket < 1 or not 0.0 < factor <= 1.0:
                raise ValueError("reliability.pec_degradation entries must map "
                                 "positive buckets to factors in (0, 1]")

    @property
    def median_tolerance(self) -> int:
        return (self.tolerance_min + self.tolerance_max) // 2

    def degradation_factor(self, pec: int) -> float:
        """Scale factor of the smallest bucket bound >= pec (largest if beyond)."""
        buckets = sorted(self.pec_degradation)
        for bound in buckets:
            if pec <= bound:
                return self.pec_degradation[bound]
        return self.pec_degradation[buckets[-1]]


def init_block_ground_truth(block_id: int, rel: ReliabilityConfig, wls: int,
                            seed: int):
    """Sample (group, base_tolerance, alpha_tenths) arrays for one block.

    Deterministic for a given (seed, block_id). WLs are partitioned into
    four equal-size groups by sampled tolerance quartile (top = Best). In
    symmetric mode every WL gets the median tolerance and rate 1.
    """
    if rel.symmetric_mode:
        base_tol = np.full(wls, rel.median_tolerance, dtype=np.int64)
        alpha_tenths = np.full(wls, 10, dtype=np.int64)
        group = np.empty(wls, dtype=np.int8)
        for g, chunk in zip(WlGroup, np.array_split(np.arange(wls), 4)):
            group[chunk] = g
        return group, base_tol, alpha_tenths

    rng = np.random.default_rng([seed, block_id])
    if rel.distribution == "uniform":
        base_tol = rng.integers(rel.tolerance_min, rel.tolerance_max + 1,
                                size=wls, dtype=np.int64)
    else:
        mean = (rel.tolerance_min + rel.tolerance_max) / 2.0
        sd = (rel.tolerance_max - rel.tolerance_min) / 6.0
        samples = rng.normal(mean, sd, size=wls)
        base_tol = np.clip(np.rint(samples), rel.tolerance_min,
                           rel.tolerance_max).astype(np.int64)

    lo = rel.alpha_mean * (1.0 - rel.alpha_spread)
    hi = rel.alpha_mean * (1.0 + rel.alpha_spread)
    alpha_tenths = np.maximum(np.rint(rng.uniform(lo, hi, size=wls) * 10.0), 10
                              ).astype(np.int64)

    # ascending tolerance order -> [Worst, Bad, Good, Best] quartiles
    order = np.argsort(base_tol, kind="stable")
    group = np.empty(wls, dtype=np.int8)
    chunks = np.array_split(order, 4)
    for g, chunk in zip((WlGroup.WORST, WlGroup.BAD, WlGroup.GOOD, WlGroup.BEST),
                        chunks):
        group[chunk] = g
    return group, base_tol, alpha_tenths


class BlockTruth:
    """Mutable per-block ground-truth state."""

    __slots__ = ("group", "base_tol", "tol", "alpha_tenths", "rc", "block_rc",
                 "pec", "reported")

    def __init__(self, group, base_tol, alpha_tenths, pec: int, factor: float):
        self.group = group
        self.base_tol = base_tol
        self.alpha_tenths = alpha_tenths
        self.rc = np.zeros(len(base_tol), dtype=np.int64)
        self.block_rc = 0
        self.pec = pec
        self.tol = np.floor(base_tol * factor).astype(np.int64)
        self.reported = np.zeros(len(base_tol), dtype=bool)


class Device:
    """Ground-truth state for every block of the device."""

    def __init__(self, geom: Geometry, rel: ReliabilityConfig, seed: int,
                 initial_pec: int = 0):
        rel.validate()
        self.geom = geom
        self.rel = rel
        self.seed = seed
        self.blocks: list[BlockTruth] = []
        wls = geom.wls_per_block
        factor = rel.degradation_factor(initial_pec)
        gmin = np.full(4, np.iinfo(np.int64).max, dtype=np.int64)
        gmax_a = np.zeros(4, dtype=np.int64)
        for b in range(geom.blocks_total):
            group, base_tol, alpha_tenths = init_block_ground_truth(
                b, rel, wls, seed)
            self.blocks.append(BlockTruth(group, base_tol, alpha_tenths,
                                          initial_pec, factor))
            for g in range(4):
                mask = group == g
                gmin[g] = min(gmin[g], int(base_tol[mask].min()))
                gmax_a[g] = max(gmax_a[g], int(alpha_tenths[mask].max()))
        self.group_min_base_tol = gmin
        self.group_max_alpha_tenths = gmax_a

    # -- read stress ------------------------------------------------------

    def apply_read_stress(self, block: int, target_wl: int) -> None:
        """Account one read of target_wl. Stress is derived lazily from the
        per-WL read counts, so this is O(1)."""
        bt = self.blocks[block]
        bt.rc[target_wl] += 1
        bt.block_rc += 1

    def stress_tenths(self, block: int) -> np.ndarray:
        """Accumulated stress of every WL, in tenths of an effective read."""
        bt = self.blocks[block]
        rc = bt.rc
        adj = np.zeros_like(rc)
        adj[1:] += rc[:-1]
        adj[:-1] += rc[1:]
        nonadj = bt.block_rc - rc - adj
        return 10 * nonadj + bt.alpha_tenths * adj

    def stress_of_tenths(self, block: int, wl: int) -> int:
        bt = self.blocks[block]
        adj = 0
        if wl > 0:
            adj += int(bt.rc[wl - 1])
        if wl < len(bt.rc) - 1:
            adj += int(bt.rc[wl + 1])
        nonadj = bt.block_rc - int(bt.rc[wl]) - adj
        return 10 * nonadj + int(bt.alpha_tenths[wl]) * adj

    def is_corrupted(self, block: int, wl: int) -> bool:
        bt = self.blocks[block]
        return self.stress_of_tenths(block, wl) > 10 * int(bt.tol[wl])

    def check_integrity(self, block: int) -> list[int]:
        """WLs whose stress strictly exceeds their tolerance."""
        bt = self.blocks[block]
        return np.nonzero(self.stress_tenths(block) > 10 * bt.tol)[0].tolist()

    def erase_block(self, block: int) -> None:
        bt = self.blocks[block]
        bt.rc[:] = 0
        bt.block_rc = 0
        bt.pec += 1
        factor = self.rel.degradation_factor(bt.pec)
        bt.tol = np.floor(bt.base_tol * factor).astype(np.int64)
        bt.reported[:] = False

    # -- reporting helpers -------------------------------------------------

    def ground_truth_rows(self):
        """Yield (block, wl, group_name, tolerance, alpha) for CSV export."""
        for b, bt in enumerate(self.blocks):
            for wl in range(len(bt.tol)):
                yield (b, wl, GROUP_NAMES[WlGroup(int(bt.group[wl]))],
                       int(bt.tol[wl]), int(bt.alpha_tenths[wl]) / 10.0)
