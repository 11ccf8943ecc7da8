"""Enterprise deployment generation: floor, ceiling-mounted AP grid,
uniform STA placement with minimum separation, strongest-signal
association and 2x2-tiled channel reuse.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class ScenarioError(ValueError):
    pass


@dataclass
class FloorPlan:
    width_m: float
    depth_m: float
    ceiling_height_m: float

    def __post_init__(self):
        if self.width_m <= 0 or self.depth_m <= 0 or self.ceiling_height_m <= 0:
            raise ScenarioError("floor dimensions must be positive")


@dataclass
class Node:
    id: int
    role: str                      # "AP" | "STA"
    position: tuple[float, float, float]
    array_rows: int = 1
    array_cols: int = 1
    element_spacing_wl: float = 0.5
    max_tx_power_dbm: float = 15.0
    noise_figure_db: float = 9.0

    @property
    def n_antennas(self) -> int:
        return self.array_rows * self.array_cols


@dataclass
class Deployment:
    floor: FloorPlan
    aps: list[Node]
    stas: list[Node]
    association: dict[int, int] = field(default_factory=dict)   # sta id -> ap id
    channel_of_ap: dict[int, int] = field(default_factory=dict)

    def ap_positions(self) -> np.ndarray:
        return np.array([a.position for a in self.aps])

    def sta_positions(self) -> np.ndarray:
        return np.array([s.position for s in self.stas])

    def stas_of_ap(self, ap_id: int) -> list[int]:
        return sorted(s for s, a in self.association.items() if a == ap_id)

    def to_dict(self) -> dict:
        return {
            "floor": {"width_m": self.floor.width_m, "depth_m": self.floor.depth_m,
                      "ceiling_height_m": self.floor.ceiling_height_m},
            "aps": [{"id": a.id, "position": list(a.position),
                     "array": [a.array_rows, a.array_cols],
                     "channel": self.channel_of_ap.get(a.id)} for a in self.aps],
            "stas": [{"id": s.id, "position": list(s.position),
                      "ap": self.association.get(s.id)} for s in self.stas],
        }

    def to_json(self, indent: int = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def place_aps(floor: FloorPlan, nx: int, ny: int, spacing_m: float) -> list[tuple[float, float, float]]:
    """Centered square grid at ceiling height; deterministic."""
    if nx < 1 or ny < 1 or spacing_m <= 0:
        raise ScenarioError("grid dimensions and spacing must be positive")
    if nx * spacing_m > floor.width_m or ny * spacing_m > floor.depth_m:
        raise ScenarioError(
            f"{nx}x{ny} grid at {spacing_m} m does not fit the "
            f"{floor.width_m}x{floor.depth_m} m floor")
    x0 = (floor.width_m - (nx - 1) * spacing_m) / 2.0
    y0 = (floor.depth_m - (ny - 1) * spacing_m) / 2.0
    out = []
    for i in range(nx):
        for j in range(ny):
            out.append((x0 + i * spacing_m, y0 + j * spacing_m, floor.ceiling_height_m))
    return out


def place_stas(floor: FloorPlan, n: int, min_separation_m: float,
               rng: np.random.Generator, height_m: float = 1.0,
               retry_budget: int = 10_000) -> list[tuple[float, float, float]]:
    """Uniform rejection sampling with a pairwise 2D separation floor."""
    if n < 1:
        raise ScenarioError("need at least one STA")
    if min_separation_m < 0:
        raise ScenarioError("separation must be non-negative")
    placed = np.empty((n, 2))
    count = 0
    min_sq = min_separation_m * min_separation_m
    while count < n:
        for attempt in range(retry_budget):
            x = rng.uniform(0.0, floor.width_m)
            y = rng.uniform(0.0, floor.depth_m)
            if count == 0:
                break
            d2 = (placed[:count, 0] - x) ** 2 + (placed[:count, 1] - y) ** 2
            if d2.min() >= min_sq:
                break
        else:
            raise ScenarioError(
                f"could not place STA {count} after {retry_budget} attempts")
        placed[count, 0] = x
        placed[count, 1] = y
        count += 1
    return [(float(px), float(py), height_m) for px, py in placed]


def associate(sta_rx_power_dbm: np.ndarray) -> dict[int, int]:
    """Map each STA to the AP with the strongest average received signal.

    sta_rx_power_dbm: (n_aps, n_stas) of P_max - pathloss - shadowing.
    Ties break toward the lowest AP id (argmax picks the first maximum).
    """
    best = np.argmax(sta_rx_power_dbm, axis=0)
    return {sta: int(ap) for sta, ap in enumerate(best)}


def assign_channels(nx: int, ny: int, reuse: int) -> dict[int, int]:
    """Channel of the AP at grid cell (i, j); APs are numbered row-major.

    reuse 4 tiles a 2x2 pattern so no two grid neighbours share a channel.
    """
    if reuse == 1:
        return {i * ny + j: 0 for i in range(nx) for j in range(ny)}
    if reuse == 4:
        return {i * ny + j: (i % 2) * 2 + (j % 2) for i in range(nx) for j in range(ny)}
    raise ScenarioError(f"unsupported channel reuse factor {reuse}")


def build_deployment(cfg, rng: np.random.Generator,
                     sta_rx_power_dbm: np.ndarray | None = None) -> Deployment:
    """Construct floor + nodes; association is attached later once the
    large-scale channel state exists (see engine.build_drop_state)."""
    d, p = cfg.deployment, cfg.phy_mac
    floor = FloorPlan(d.floor_width_m, d.floor_depth_m, d.ceiling_height_m)
    ap_pos = place_aps(floor, d.ap_grid_nx, d.ap_grid_ny, d.ap_spacing_m)
    sta_pos = place_stas(floor, d.n_stas, d.min_sta_separation_m, rng,
                         height_m=d.sta_height_m,
                         retry_budget=d.sta_placement_retry_budget)
    aps = [Node(i, "AP", pos, p.ap_array_rows, p.ap_array_cols,
                p.element_spacing_wl, p.ap_max_tx_dbm, p.ap_noise_figure_db)
           for i, pos in enumerate(ap_pos)]
    stas = [Node(i, "STA", pos, 1, 1, p.element_spacing_wl,
                 p.sta_max_tx_dbm, p.sta_noise_figure_db)
            for i, pos in enumerate(sta_pos)]
    dep = Deployment(floor, aps, stas)
    dep.channel_of_ap = assign_channels(d.ap_grid_nx, d.ap_grid_ny, d.channel_reuse)
    if sta_rx_power_dbm is not None:
        dep.association = associate(sta_rx_power_dbm)
    return dep
