"""Simulation configuration: schema, canonical presets, YAML loading.

The two presets ("11ax", "11be") pin every deployment / PHY / MAC /
channel / traffic parameter of the canonical enterprise scenario; the
remaining knobs are modelling assumptions that the summary output echoes
so each result is reproducible from its own metadata.
"""
from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Optional

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class DeploymentCfg:
    floor_width_m: float = 40.0
    floor_depth_m: float = 40.0
    ceiling_height_m: float = 3.0
    ap_grid_nx: int = 4
    ap_grid_ny: int = 4
    ap_spacing_m: float = 10.0
    n_stas: int = 512
    sta_height_m: float = 1.0
    min_sta_separation_m: float = 0.1
    channel_reuse: int = 4
    sta_placement_retry_budget: int = 10_000


@dataclass
class PhyMacCfg:
    carrier_ghz: float = 5.18
    bandwidth_mhz: int = 80
    guard_interval_us: float = 0.8
    symbol_base_us: float = 12.8
    preamble_us: float = 44.0
    ltf_us_per_stream: float = 8.0
    ap_max_tx_dbm: float = 24.0
    sta_max_tx_dbm: float = 15.0
    ap_array_rows: int = 4
    ap_array_cols: int = 2
    sta_antennas: int = 1
    element_spacing_wl: float = 0.5
    ap_noise_figure_db: float = 7.0
    sta_noise_figure_db: float = 9.0
    max_scheduled_stas: int = 8
    sounding_mode: str = "explicit"  # explicit | implicit
    mpdu_payload_bytes: int = 1500
    mpdu_overhead_bytes: int = 40    # MAC header + FCS + A-MPDU delimiter/padding
    txop_limit_us: int = 4000
    cca_energy_dbm: float = -62.0
    cca_preamble_dbm: float = -82.0
    preamble_min_sinr_db: float = -0.8
    mcs_table_path: Optional[str] = None  # None -> builtin 802.11ax table


@dataclass
class DcfCfg:
    slot_us: int = 9
    sifs_us: int = 16
    cwmin: int = 15
    cwmax: int = 1023
    retry_limit: int = 7
    control_frame_us: int = 32       # block-ACK / trigger base duration
    trigger_us_per_sta: float = 2.0  # UL trigger grows with scheduled STA count

    @property
    def difs_us(self) -> int:
        return self.sifs_us + 2 * self.slot_us


@dataclass
class ChannelCfg:
    shadowing_sigma_los_db: float = 3.0
    shadowing_sigma_nlos_db: float = 8.0
    k_factor_mean_db: float = 9.0
    k_factor_std_db: float = 3.5
    noise_psd_dbm_hz: float = -174.0


@dataclass
class SchedulerCfg:
    sus_epsilon: float = 0.3  # min residual-norm fraction kept after projection


@dataclass
class MinstrelCfg:
    probe_probability: float = 0.1
    ewma_weight: float = 0.25
    probe_mpdu_cap: int = 128


@dataclass
class TrafficCfg:
    file_size_bytes: int = 500_000
    offered_load_mbps: float = 75.0
    dl_fraction: float = 0.5


@dataclass
class SoundingCfg:
    staleness_ms: float = 20.0
    ndp_ltf_us_per_stream: float = 8.0   # explicit: NDP training symbols per sounded stream
    report_us_per_stream: float = 4.0    # explicit: per-STA feedback, per stream, per 80 MHz
    pilot_us_per_sta: float = 4.0        # implicit: per-STA uplink pilot slot (incl. trigger share)
    feedback_ref_mcs: int = 10           # explicit reports slow down below this link rate
    feedback_scale_cap: float = 16.0


@dataclass
class EngineCfg:
    drops: int = 100
    duration_s: float = 10.0
    seed: int = 1
    warmup_s: float = 0.5
    jobs: int = 1
    trace: bool = False


@dataclass
class SimConfig:
    label: str = "11ax"
    deployment: DeploymentCfg = field(default_factory=DeploymentCfg)
    phy_mac: PhyMacCfg = field(default_factory=PhyMacCfg)
    dcf: DcfCfg = field(default_factory=DcfCfg)
    channel: ChannelCfg = field(default_factory=ChannelCfg)
    scheduler: SchedulerCfg = field(default_factory=SchedulerCfg)
    minstrel: MinstrelCfg = field(default_factory=MinstrelCfg)
    traffic: TrafficCfg = field(default_factory=TrafficCfg)
    sounding: SoundingCfg = field(default_factory=SoundingCfg)
    engine: EngineCfg = field(default_factory=EngineCfg)

    @property
    def ap_antennas(self) -> int:
        return self.phy_mac.ap_array_rows * self.phy_mac.ap_array_cols

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


PRESETS = {
    "11ax": {
        "label": "11ax",
        "phy_mac": {
            "carrier_ghz": 5.18,
            "bandwidth_mhz": 80,
            "ap_array_rows": 4,
            "ap_array_cols": 2,
            "max_scheduled_stas": 8,
            "sounding_mode": "explicit",
        },
    },
    "11be": {
        "label": "11be",
        "phy_mac": {
            "carrier_ghz": 6.2,
            "bandwidth_mhz": 160,
            "ap_array_rows": 4,
            "ap_array_cols": 4,
            "max_scheduled_stas": 16,
            "sounding_mode": "implicit",
        },
    },
}

_GROUPS = {
    "deployment": DeploymentCfg,
    "phy_mac": PhyMacCfg,
    "dcf": DcfCfg,
    "channel": ChannelCfg,
    "scheduler": SchedulerCfg,
    "minstrel": MinstrelCfg,
    "traffic": TrafficCfg,
    "sounding": SoundingCfg,
    "engine": EngineCfg,
}


def _apply_group(obj, group_name: str, values: dict) -> None:
    fields = {f.name: f for f in dataclasses.fields(obj)}
    for key, val in values.items():
        if key not in fields:
            raise ConfigError(f"unknown key '{group_name}.{key}'")
        ftype = fields[key].type
        cur = getattr(obj, key)
        # coerce scalars; YAML already delivers typed values for most keys
        if val is not None and cur is not None and not isinstance(val, type(cur)):
            try:
                val = type(cur)(val)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for '{group_name}.{key}': {val!r} ({exc})")
        setattr(obj, key, val)
        del ftype


def from_dict(data: dict) -> SimConfig:
    cfg = SimConfig()
    for key, val in data.items():
        if key == "label":
            cfg.label = str(val)
        elif key in _GROUPS:
            if not isinstance(val, dict):
                raise ConfigError(f"group '{key}' must be a mapping")
            _apply_group(getattr(cfg, key), key, val)
        else:
            raise ConfigError(f"unknown config group '{key}'")
    return cfg


def preset(name: str) -> SimConfig:
    key = name.lstrip(".")
    if key not in PRESETS:
        raise ConfigError(f"unknown preset '{name}' (have: {sorted(PRESETS)})")
    return from_dict(copy.deepcopy(PRESETS[key]))


def load_config(path: Optional[str] = None, preset_name: Optional[str] = None,
                overrides: Optional[dict[str, Any]] = None) -> SimConfig:
    """Resolve preset -> file -> key=value overrides, then validate."""
    if preset_name is not None:
        cfg = preset(preset_name)
    else:
        cfg = SimConfig()
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must contain a mapping")
        merged = _merge(_nested_dict(cfg), data)
        cfg = from_dict(merged)
    if overrides:
        for dotted, val in overrides.items():
            _apply_override(cfg, dotted, val)
    validate(cfg)
    return cfg


def _nested_dict(cfg: SimConfig) -> dict:
    return cfg.to_dict()


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _apply_override(cfg: SimConfig, dotted: str, val: Any) -> None:
    if dotted == "label":
        cfg.label = str(val)
        return
    parts = dotted.split(".")
    if len(parts) != 2 or parts[0] not in _GROUPS:
        raise ConfigError(f"override key must look like group.key, got '{dotted}'")
    group = getattr(cfg, parts[0])
    fields = {f.name for f in dataclasses.fields(group)}
    if parts[1] not in fields:
        raise ConfigError(f"unknown key '{dotted}'")
    cur = getattr(group, parts[1])
    if isinstance(val, str) and cur is not None and not isinstance(cur, str):
        if isinstance(cur, bool):
            val = val.lower() in ("1", "true", "yes")
        else:
            val = type(cur)(val)
    setattr(group, parts[1], val)


def validate(cfg: SimConfig) -> None:
    errs = []
    d, p, e = cfg.deployment, cfg.phy_mac, cfg.engine
    if d.floor_width_m <= 0 or d.floor_depth_m <= 0 or d.ceiling_height_m <= 0:
        errs.append("floor dimensions must be positive")
    if d.ap_grid_nx * d.ap_spacing_m > d.floor_width_m or d.ap_grid_ny * d.ap_spacing_m > d.floor_depth_m:
        errs.append("AP grid does not fit the floor")
    if d.n_stas < 1:
        errs.append("n_stas must be >= 1")
    if d.channel_reuse not in (1, 4):
        errs.append(f"unsupported channel reuse factor {d.channel_reuse}")
    if p.sta_antennas != 1:
        errs.append("STAs must have exactly 1 antenna element")
    if p.bandwidth_mhz not in (20, 40, 80, 160):
        errs.append(f"unsupported bandwidth {p.bandwidth_mhz} MHz")
    if not 0.5 <= p.carrier_ghz <= 100.0:
        errs.append("carrier frequency outside [0.5, 100] GHz")
    n_ant = p.ap_array_rows * p.ap_array_cols
    if n_ant < 1:
        errs.append("AP needs at least one antenna element")
    if p.max_scheduled_stas > n_ant:
        errs.append(f"max_scheduled_stas ({p.max_scheduled_stas}) exceeds AP antennas ({n_ant})")
    if p.max_scheduled_stas < 1:
        errs.append("max_scheduled_stas must be >= 1")
    if p.sounding_mode not in ("explicit", "implicit"):
        errs.append(f"unknown sounding mode '{p.sounding_mode}'")
    if not p.cca_preamble_dbm < p.cca_energy_dbm:
        errs.append("preamble detection threshold must lie below the energy threshold")
    if not 0.0 < cfg.scheduler.sus_epsilon < 1.0:
        errs.append("sus_epsilon must be in (0, 1)")
    if not 0.0 <= cfg.minstrel.probe_probability <= 1.0:
        errs.append("probe_probability must be in [0, 1]")
    if not 0.0 < cfg.minstrel.ewma_weight <= 1.0:
        errs.append("ewma_weight must be in (0, 1]")
    if not 0.0 <= cfg.traffic.dl_fraction <= 1.0:
        errs.append("dl_fraction must be in [0, 1]")
    if cfg.traffic.file_size_bytes <= 0 or cfg.traffic.offered_load_mbps < 0:
        errs.append("traffic file size must be positive and load non-negative")
    if e.drops < 1:
        errs.append("drops must be >= 1")
    if e.duration_s <= e.warmup_s:
        errs.append("duration must exceed the warm-up window")
    if e.jobs < 1:
        errs.append("jobs must be >= 1")
    if cfg.dcf.cwmin < 1 or cfg.dcf.cwmax < cfg.dcf.cwmin:
        errs.append("need 1 <= cwmin <= cwmax")
    if errs:
        raise ConfigError("; ".join(errs))
