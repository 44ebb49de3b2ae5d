import pytest

from strawsim.config import resolve_config
from strawsim.device import Device, ReliabilityConfig
from strawsim.geometry import Geometry


def desk_config(name="test", **user):
    base = {"preset": "desk", "name": name}
    base.update(user)
    return resolve_config(base)


@pytest.fixture
def tiny_device():
    """One block of 5 WLs with controlled ground truth."""
    geom = Geometry(channels=1, dies_per_channel=1, planes_per_die=1,
                    blocks_per_plane=1, wls_per_block=5, pages_per_wl=1)
    rel = ReliabilityConfig(tolerance_min=1000, tolerance_max=2000,
                            pec_degradation={1000: 1.0})
    dev = Device(geom, rel, seed=0)
    return geom, dev
