"""Flash geometry, physical addressing, and device timing parameters."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Geometry:
    """Channel/die/plane/block/WL/page hierarchy of the simulated device.

    Defaults model a 2-TiB high-density drive: 8 channels, 4 dies per
    channel, 4 planes per die, 141 blocks per plane, 321 vertical WLs per
    block with 24 pages each (7704 pages per block).
    """

    channels: int = 8
    dies_per_channel: int = 4
    planes_per_die: int = 4
    blocks_per_plane: int = 141
    wls_per_block: int = 321
    pages_per_wl: int = 24
    page_size: int = 16384

    def __post_init__(self):
        for name in ("channels", "dies_per_channel", "planes_per_die",
                     "blocks_per_plane", "wls_per_block", "pages_per_wl",
                     "page_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"geometry.{name} must be >= 1")

    @property
    def dies_total(self) -> int:
        return self.channels * self.dies_per_channel

    @property
    def planes_total(self) -> int:
        return self.dies_total * self.planes_per_die

    @property
    def blocks_total(self) -> int:
        return self.planes_total * self.blocks_per_plane

    @property
    def pages_per_block(self) -> int:
        return self.wls_per_block * self.pages_per_wl

    @property
    def total_pages(self) -> int:
        return self.blocks_total * self.pages_per_block

    @property
    def capacity_bytes(self) -> int:
        return self.total_pages * self.page_size

    # Block ids are plane-major: block b lives in plane b // blocks_per_plane.
    def plane_of_block(self, block: int) -> int:
        return block // self.blocks_per_plane

    def die_of_block(self, block: int) -> int:
        return self.plane_of_block(block) // self.planes_per_die

    def channel_of_block(self, block: int) -> int:
        return self.die_of_block(block) // self.dies_per_channel

    def blocks_of_plane(self, plane: int) -> range:
        start = plane * self.blocks_per_plane
        return range(start, start + self.blocks_per_plane)


@dataclass(frozen=True)
class PhysAddr:
    """Physical page address; every index must lie within Geometry bounds."""

    channel: int
    die: int
    plane: int
    block: int
    wl: int
    page: int

    def validate(self, geom: Geometry) -> None:
        bounds = (
            ("channel", geom.channels),
            ("die", geom.dies_per_channel),
            ("plane", geom.planes_per_die),
            ("block", geom.blocks_per_plane),
            ("wl", geom.wls_per_block),
            ("page", geom.pages_per_wl),
        )
        for name, limit in bounds:
            value = getattr(self, name)
            if not 0 <= value < limit:
                raise ValueError(f"PhysAddr.{name}={value} out of range [0, {limit})")

    @classmethod
    def from_flat(cls, geom: Geometry, block: int, page_in_block: int) -> "PhysAddr":
        plane = geom.plane_of_block(block)
        die = geom.die_of_block(block)
        return cls(
            channel=geom.channel_of_block(block),
            die=die % geom.dies_per_channel,
            plane=plane % geom.planes_per_die,
            block=block % geom.blocks_per_plane,
            wl=page_in_block // geom.pages_per_wl,
            page=page_in_block % geom.pages_per_wl,
        )


@dataclass(frozen=True)
class TimingParams:
    """Flash operation latencies (us) and transfer bandwidths (bytes/us)."""

    t_read: int = 40
    t_prog: int = 380
    t_erase: int = 3500
    channel_bw: int = 2097   # 2.0 GiB/s
    host_bw: int = 8389      # 8.0 GiB/s

    def transfer_us(self, nbytes: int) -> int:
        # ceil division; one page transfer occupies the channel this long
        return -(-nbytes // self.channel_bw)
