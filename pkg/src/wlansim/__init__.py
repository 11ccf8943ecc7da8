"""wlansim: system-level WLAN throughput simulator (802.11ax vs 802.11be)."""

__version__ = "0.1.0"

from .config import SimConfig, load_config, preset  # noqa: F401
from .engine import run_campaign, run_drop, percentile  # noqa: F401
