"""Policy-visible read-disturbance model.

The reclaim parameter table (RPT) maps (PEC bucket, WL group) to the
effective read budget of the group's weakest WL and the adjacent-read
disturbance rate. Rates are fixed-point with one decimal place (stored
as tenths) so effective-read-count arithmetic is exact integer math.
"""

from dataclasses import dataclass

from .device import GROUPS_BY_NAME, GROUP_NAMES, WlGroup


class RptError(ValueError):
    pass


def alpha_to_tenths(alpha: float) -> int:
    tenths = int(round(alpha * 10))
    if tenths < 10:
        raise RptError(f"alpha must be >= 1.0, got {alpha}")
    return tenths


@dataclass(frozen=True)
class RptEntry:
    pec_bucket: int
    group: WlGroup
    erc_max: int
    alpha_tenths: int

    @property
    def alpha(self) -> float:
        return self.alpha_tenths / 10.0


# Shipped table anchored to published characterization points
# (Good@2K: 767K budget at rate 9.0; Best@2K rate 8.7; the remaining
# cells are interpolated to preserve group ordering and are
# config-overridable, see docs).
DEFAULT_RPT_ENTRIES = [
    {"pec_bucket": 1000, "group": "Best", "erc_max": 1_005_000, "alpha": 8.5},
    {"pec_bucket": 1000, "group": "Good", "erc_max": 902_000, "alpha": 8.8},
    {"pec_bucket": 1000, "group": "Bad", "erc_max": 706_000, "alpha": 8.8},
    {"pec_bucket": 1000, "group": "Worst", "erc_max": 558_000, "alpha": 8.5},
    {"pec_bucket": 2000, "group": "Best", "erc_max": 854_000, "alpha": 8.7},
    {"pec_bucket": 2000, "group": "Good", "erc_max": 767_000, "alpha": 9.0},
    {"pec_bucket": 2000, "group": "Bad", "erc_max": 600_000, "alpha": 9.0},
    {"pec_bucket": 2000, "group": "Worst", "erc_max": 474_672, "alpha": 8.7},
]


class Rpt:
    """Immutable lookup table; safe to share across simulation instances."""

    def __init__(self, entries: list[RptEntry]):
        self._table: dict[tuple[int, WlGroup], RptEntry] = {}
        for e in entries:
            key = (e.pec_bucket, e.group)
            if key in self._table:
                raise RptError(f"rpt: duplicate entry for {key}")
            self._table[key] = e
        self.buckets = sorted({e.pec_bucket for e in entries})
        self._validate()

    def _validate(self) -> None:
        if not self.buckets:
            raise RptError("rpt: table is empty")
        for bucket in self.buckets:
            for g in WlGroup:
                if (bucket, g) not in self._table:
                    raise RptError(
                        f"rpt: missing group {GROUP_NAMES[g]} in bucket {bucket}")
            ordered = [self._table[(bucket, g)].erc_max for g in
                       (WlGroup.BEST, WlGroup.GOOD, WlGroup.BAD, WlGroup.WORST)]
            if any(a < b for a, b in zip(ordered, ordered[1:])):
                raise RptError(
                    f"rpt: erc_max must be non-increasing Best>=Good>=Bad>=Worst "
                    f"in bucket {bucket}, got {ordered}")
        for g in WlGroup:
            per_group = [self._table[(b, g)].erc_max for b in self.buckets]
            if any(a < b for a, b in zip(per_group, per_group[1:])):
                raise RptError(
                    f"rpt: erc_max for group {GROUP_NAMES[g]} must be "
                    f"non-increasing across PEC buckets, got {per_group}")

    @classmethod
    def from_entries(cls, raw: list[dict]) -> "Rpt":
        entries = []
        for item in raw:
            try:
                group = GROUPS_BY_NAME[str(item["group"])]
                entries.append(RptEntry(
                    pec_bucket=int(item["pec_bucket"]),
                    group=group,
                    erc_max=int(item["erc_max"]),
                    alpha_tenths=alpha_to_tenths(float(item["alpha"])),
                ))
            except KeyError as exc:
                raise RptError(f"rpt: entry {item} missing/unknown field {exc}")
        return cls(entries)

    @classmethod
    def derive_from_device(cls, device, margin: float = 0.95) -> "Rpt":
        """Build a guard-banded table from the device's sampled ground truth,
        modeling offline characterization: each budget is `margin` times the
        weakest sampled tolerance of the group, per degradation bucket, and
        each rate is the strongest sampled rate of the group."""
        if not 0.0 < margin <= 1.0:
            raise RptError(f"rpt: margin must be in (0, 1], got {margin}")
        entries = []
        for bucket in sorted(device.rel.pec_degradation):
            factor = device.rel.pec_degradation[bucket]
            for g in WlGroup:
                min_tol = int(device.group_min_base_tol[g] * factor)
                entries.append(RptEntry(
                    pec_bucket=bucket,
                    group=g,
                    erc_max=int(margin * min_tol),
                    alpha_tenths=int(device.group_max_alpha_tenths[g]),
                ))
        return cls(entries)

    def lookup_entry(self, pec: int, group: WlGroup) -> RptEntry:
        """Entry of the smallest bucket bound >= pec; largest bucket beyond."""
        if pec < 0:
            raise RptError(f"rpt: pec must be >= 0, got {pec}")
        for bucket in self.buckets:
            if pec <= bucket:
                return self._table[(bucket, group)]
        return self._table[(self.buckets[-1], group)]

    def lookup(self, pec: int, group: WlGroup) -> tuple[int, float]:
        e = self.lookup_entry(pec, group)
        return e.erc_max, e.alpha

    def largest_bucket_entries(self) -> list[RptEntry]:
        return [self._table[(self.buckets[-1], g)] for g in WlGroup]

    def to_config_entries(self) -> list[dict]:
        return [
            {"pec_bucket": e.pec_bucket, "group": GROUP_NAMES[e.group],
             "erc_max": e.erc_max, "alpha": e.alpha}
            for key, e in sorted(self._table.items())
        ]


def erc_tenths(r_adj: int, r_nonadj: int, alpha_tenths: int) -> int:
    """Effective read count in exact tenths units."""
    if r_adj < 0 or r_nonadj < 0:
        raise ValueError("read counts must be >= 0")
    return 10 * r_nonadj + alpha_tenths * r_adj


def effective_read_count(r_adj: int, r_nonadj: int, alpha: float) -> int:
    """Disturbance-weighted read count: r_nonadj + alpha * r_adj (floored)."""
    return erc_tenths(r_adj, r_nonadj, alpha_to_tenths(alpha)) // 10


def disturbed_tenths(erc10: int, erc_max: int, alpha_tenths: int,
                     interval: int) -> bool:
    # headroom assumes the worst case: every read of the next interval
    # lands on an adjacent WL
    return erc10 + alpha_tenths * interval >= 10 * erc_max


def is_heavily_disturbed(erc: int, erc_max: int, alpha: float,
                         interval: int) -> bool:
    """True iff erc plus worst-case next-interval stress reaches erc_max."""
    if erc < 0 or erc_max < 0 or interval < 0:
        raise ValueError("inputs must be >= 0")
    return disturbed_tenths(10 * erc, erc_max, alpha_to_tenths(alpha), interval)
