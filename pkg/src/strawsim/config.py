"""Run configuration: loading, presets, overrides, validation.

Configs are YAML files; every key has a default, the optional `preset`
key expands a named bundle first, and `--override a.b.c=value` flags
patch individual keys last. The STRAWSIM_SEED environment variable, when
set, wins over the configured seed.
"""

import copy
import os

import yaml

from . import workload as wl
from .device import ReliabilityConfig
from .disturbance import DEFAULT_RPT_ENTRIES, Rpt, RptError
from .ftl import RrPolicyConfig
from .geometry import Geometry, TimingParams


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "name": "run",
    "preset": None,
    "geometry": {
        "channels": 8, "dies_per_channel": 4, "planes_per_die": 4,
        "blocks_per_plane": 141, "wls_per_block": 321, "pages_per_wl": 24,
        "page_size": 16384,
    },
    "timing": {
        "t_read": 40, "t_prog": 380, "t_erase": 3500,
        "channel_bw": 2097, "host_bw": 8389,
    },
    "reliability": {
        "tolerance_min": 403000, "tolerance_max": 962000,
        "alpha_mean": 8.4, "alpha_spread": 0.1,
        "distribution": "uniform", "symmetric_mode": False,
        "pec_degradation": {1000: 1.0, 2000: 0.85},
        "seed": None,
    },
    "rpt": {"mode": "derived", "margin": 0.95, "entries": None},
    "policy": {
        "policy": "STRAW", "block_rr_threshold": None, "check_interval": 1000,
    },
    "counters": {"backend": "exact", "entries_per_block": 32},
    "workload": {
        "synthetic": {
            "pattern": "random", "read_ratio": 1.0, "footprint": 4096,
            "op_count": 20000, "request_size": 1, "mix_ratio": 0.5,
            "hot_pages": 1, "hot_ratio": 1.0, "arrival_interval_us": 0,
            "seed": None,
        },
        "trace": None,           # path to a trace CSV; overrides synthetic
        "device_id": 0,
        "precondition": True,
    },
    "initial_pec": 1000,
    "seed": 42,
    "over_provisioning": 0.07,
    "gc_watermark": 0.02,
    "replay_mode": "closed",     # "closed" or "open"
    "output": None,
}

# Scaled-down geometry and tolerances (divided by 100) so experiments
# finish in seconds.
PRESETS = {
    "desk": {
        "geometry": {
            "channels": 2, "dies_per_channel": 1, "planes_per_die": 2,
            "blocks_per_plane": 8, "wls_per_block": 48, "pages_per_wl": 4,
            "page_size": 16384,
        },
        "reliability": {"tolerance_min": 4030, "tolerance_max": 9620},
        "policy": {"check_interval": 100},
        "workload": {"synthetic": {"footprint": 4096, "op_count": 20000}},
    },
}


def _deep_merge(base: dict, patch: dict, path="") -> dict:
    out = dict(base)
    for key, value in patch.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _deep_merge(base[key], value, where)
        else:
            out[key] = value
    return out


def _merge_loose(base: dict, patch: dict) -> dict:
    # like _deep_merge but without unknown-key checking (used for presets)
    out = dict(base)
    for key, value in patch.items():
        if isinstance(out.get(key), dict) and isinstance(value, dict):
            out[key] = _merge_loose(out[key], value)
        else:
            out[key] = value
    return out


def parse_override(text: str):
    if "=" not in text:
        raise ConfigError(f"override must look like key=value, got {text!r}")
    key, _, raw = text.partition("=")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return key.strip(), value


def _apply_override(resolved: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = resolved
    for i, part in enumerate(parts[:-1]):
        if not isinstance(node.get(part), dict):
            raise ConfigError(f"unknown config key: {'.'.join(parts[: i + 1])}")
        node = node[part]
    leaf = parts[-1]
    if leaf not in node:
        raise ConfigError(f"unknown config key: {dotted}")
    if isinstance(node[leaf], dict) and not isinstance(value, dict):
        raise ConfigError(f"config key {dotted} is a section, not a value")
    node[leaf] = value


class RunConfig:
    """A fully resolved configuration; `resolved` is the canonical dict
    embedded in reports for provenance."""

    def __init__(self, resolved: dict):
        self.resolved = resolved
        self.validate()

    # -- typed accessors ---------------------------------------------------

    @property
    def name(self) -> str:
        return str(self.resolved["name"])

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def initial_pec(self) -> int:
        return int(self.resolved["initial_pec"])

    @property
    def over_provisioning(self) -> float:
        return float(self.resolved["over_provisioning"])

    @property
    def gc_watermark(self) -> float:
        return float(self.resolved["gc_watermark"])

    @property
    def replay_mode(self) -> str:
        return str(self.resolved["replay_mode"])

    @property
    def precondition(self) -> bool:
        return bool(self.resolved["workload"]["precondition"])

    @property
    def counter_backend(self) -> str:
        return str(self.resolved["counters"]["backend"])

    @property
    def counter_entries(self) -> int:
        return int(self.resolved["counters"]["entries_per_block"])

    def geometry(self) -> Geometry:
        try:
            return Geometry(**self.resolved["geometry"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"geometry: {exc}")

    def timing(self) -> TimingParams:
        try:
            return TimingParams(**self.resolved["timing"])
        except TypeError as exc:
            raise ConfigError(f"timing: {exc}")

    def reliability(self) -> ReliabilityConfig:
        section = dict(self.resolved["reliability"])
        if section.get("seed") is None:
            section["seed"] = self.seed
        section["pec_degradation"] = {
            int(k): float(v) for k, v in section["pec_degradation"].items()}
        try:
            rel = ReliabilityConfig(**section)
            rel.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"reliability: {exc}")
        return rel

    def policy(self) -> RrPolicyConfig:
        section = self.resolved["policy"]
        try:
            pol = RrPolicyConfig(
                policy=str(section["policy"]).upper(),
                block_rr_threshold=section["block_rr_threshold"],
                check_interval=int(section["check_interval"]))
            pol.validate()
        except ValueError as exc:
            raise ConfigError(f"policy: {exc}")
        return pol

    def build_rpt(self, device) -> Rpt:
        section = self.resolved["rpt"]
        mode = section["mode"]
        try:
            if mode == "derived":
                return Rpt.derive_from_device(device,
                                              margin=float(section["margin"]))
            if mode == "paper":
                return Rpt.from_entries(DEFAULT_RPT_ENTRIES)
            if mode == "explicit":
                entries = section["entries"]
                if not entries:
                    raise RptError("rpt: explicit mode needs rpt.entries")
                return Rpt.from_entries(entries)
        except RptError as exc:
            raise ConfigError(str(exc))
        raise ConfigError(f"rpt: mode unknown: {mode}")

    def synthetic_spec(self) -> wl.SyntheticSpec:
        section = dict(self.resolved["workload"]["synthetic"])
        if section.get("seed") is None:
            section["seed"] = self.seed + 1
        try:
            spec = wl.spec_from_config(section)
            spec.validate()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"workload: {exc}")
        return spec

    def build_workload(self, logical_pages: int):
        trace_path = self.resolved["workload"]["trace"]
        if trace_path:
            with open(trace_path, newline="") as fh:
                return wl.parse_trace(
                    fh, self.geometry().page_size, logical_pages,
                    device_id=self.resolved["workload"]["device_id"])
        spec = self.synthetic_spec()
        if spec.footprint > logical_pages:
            raise ConfigError(
                f"workload: footprint {spec.footprint} exceeds logical "
                f"capacity {logical_pages} pages")
        return wl.generate_synthetic(spec)

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        self.geometry()
        self.timing()
        self.reliability()
        self.policy()
        if self.replay_mode not in ("closed", "open"):
            raise ConfigError(
                f"replay_mode must be closed or open, got {self.replay_mode}")
        if not 0.0 <= self.over_provisioning < 1.0:
            raise ConfigError("over_provisioning must be in [0, 1)")
        if not 0.0 < self.gc_watermark < 1.0:
            raise ConfigError("gc_watermark must be in (0, 1)")
        if self.initial_pec < 0:
            raise ConfigError("initial_pec must be >= 0")
        if self.counter_backend not in ("exact", "space_saving"):
            raise ConfigError(
                f"counters.backend unknown: {self.counter_backend}")
        if self.counter_entries < 1:
            raise ConfigError("counters.entries_per_block must be >= 1")
        section = self.resolved["rpt"]
        if section["mode"] == "explicit":
            if not section["entries"]:
                raise ConfigError("rpt: explicit mode needs rpt.entries")
            try:
                Rpt.from_entries(section["entries"])
            except RptError as exc:
                raise ConfigError(str(exc))
        if not self.resolved["workload"]["trace"]:
            self.synthetic_spec()


def resolve_config(user: dict, overrides=(), env=None) -> RunConfig:
    env = os.environ if env is None else env
    base = copy.deepcopy(DEFAULTS)
    preset = user.get("preset")
    if preset is not None:
        try:
            base = _merge_loose(base, PRESETS[str(preset)])
        except KeyError:
            raise ConfigError(f"preset unknown: {preset}")
    resolved = _deep_merge(base, user)
    for item in overrides:
        key, value = parse_override(item) if isinstance(item, str) else item
        _apply_override(resolved, key, value)
    if env.get("STRAWSIM_SEED"):
        resolved["seed"] = int(env["STRAWSIM_SEED"])
    return RunConfig(resolved)


def load_config(path, overrides=(), env=None) -> RunConfig:
    with open(path) as fh:
        user = yaml.safe_load(fh) or {}
    if not isinstance(user, dict):
        raise ConfigError(f"config file {path} must contain a mapping")
    return resolve_config(user, overrides, env)
