"""Trace-driven SSD read-disturbance simulator with WL-level read reclaim."""

__version__ = "0.1.0"

from .config import RunConfig, load_config, resolve_config
from .engine import run_simulation, run_simulation_with_events

__all__ = ["RunConfig", "load_config", "resolve_config", "run_simulation",
           "run_simulation_with_events", "__version__"]
