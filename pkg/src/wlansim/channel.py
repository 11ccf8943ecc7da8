"""Indoor propagation model: TR 38.901 InH-Office path loss and LOS
probability, log-normal shadowing, Ricean fading with log-normal K factor,
thermal noise.

Large-scale quantities (dB) are drawn once per link per drop; fading is
normalized so the mean entry power of every channel matrix is 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

# InH-Office (open office) LOS probability breakpoints, metres
_LOS_NEAR_M = 5.0
_LOS_MID_M = 49.0


def los_probability(d_2d: float) -> float:
    """LOS probability vs 2D distance (InH-Office, open office)."""
    if d_2d < 0:
        raise ValueError(f"negative distance {d_2d}")
    if d_2d <= _LOS_NEAR_M:
        p = 1.0
    elif d_2d <= _LOS_MID_M:
        p = math.exp(-(d_2d - _LOS_NEAR_M) / 70.8)
    else:
        p = math.exp(-(d_2d - _LOS_MID_M) / 211.7) * 0.54
    return min(1.0, max(0.0, p))


def los_probability_array(d_2d: np.ndarray) -> np.ndarray:
    d = np.asarray(d_2d, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("negative distance")
    p = np.where(
        d <= _LOS_NEAR_M,
        1.0,
        np.where(
            d <= _LOS_MID_M,
            np.exp(-(d - _LOS_NEAR_M) / 70.8),
            np.exp(-(d - _LOS_MID_M) / 211.7) * 0.54,
        ),
    )
    return np.clip(p, 0.0, 1.0)


def path_loss(d_3d: float, fc_ghz: float, is_los: bool) -> float:
    """InH-Office path loss in dB; distances below 1 m clamp to 1 m."""
    if not 0.5 <= fc_ghz <= 100.0:
        raise ValueError(f"carrier {fc_ghz} GHz outside [0.5, 100]")
    d = max(1.0, d_3d)
    pl_los = 32.4 + 17.3 * math.log10(d) + 20.0 * math.log10(fc_ghz)
    if is_los:
        return pl_los
    pl_nlos = 17.3 + 38.3 * math.log10(d) + 24.9 * math.log10(fc_ghz)
    return max(pl_los, pl_nlos)


def path_loss_array(d_3d: np.ndarray, fc_ghz: float, is_los: np.ndarray) -> np.ndarray:
    if not 0.5 <= fc_ghz <= 100.0:
        raise ValueError(f"carrier {fc_ghz} GHz outside [0.5, 100]")
    d = np.maximum(1.0, np.asarray(d_3d, dtype=np.float64))
    pl_los = 32.4 + 17.3 * np.log10(d) + 20.0 * math.log10(fc_ghz)
    pl_nlos = np.maximum(pl_los, 17.3 + 38.3 * np.log10(d) + 24.9 * math.log10(fc_ghz))
    return np.where(is_los, pl_los, pl_nlos)


def shadowing_sample(is_los: bool, rng: np.random.Generator,
                     sigma_los: float = 3.0, sigma_nlos: float = 8.0) -> float:
    """Zero-mean log-normal shadowing in dB; one draw per link per drop."""
    return float(rng.normal(0.0, sigma_los if is_los else sigma_nlos))


def noise_power(bandwidth_hz: float, noise_figure_db: float,
                psd_dbm_hz: float = -174.0) -> float:
    """Thermal noise power in dBm over the given bandwidth."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return psd_dbm_hz + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def rx_power(tx_power_dbm: float, link: "LinkLargeScale") -> float:
    """Average received power; antenna gains are 0 dBi."""
    return tx_power_dbm - link.path_loss_db - link.shadowing_db


def db_to_lin(db):
    return 10.0 ** (np.asarray(db, dtype=np.float64) / 10.0)


def lin_to_db(lin):
    return 10.0 * np.log10(lin)


@dataclass
class LinkLargeScale:
    tx_id: int
    rx_id: int
    distance_3d_m: float
    is_los: bool
    path_loss_db: float
    shadowing_db: float

    @property
    def loss_db(self) -> float:
        return self.path_loss_db + self.shadowing_db


@dataclass
class FadingState:
    """Per-link fading parameters plus a seeded small-scale generator."""
    k_factor_db: float   # -inf encodes pure Rayleigh (K = 0 linear)
    steering: np.ndarray  # (n_rx, n_tx) unit-modulus LOS response
    rng: np.random.Generator

    @property
    def k_linear(self) -> float:
        if self.k_factor_db == -math.inf:
            return 0.0
        return 10.0 ** (self.k_factor_db / 10.0)


@dataclass
class NoiseModel:
    spectral_density_dbm_hz: float = -174.0
    noise_figure_db: float = 7.0

    def power_dbm(self, bandwidth_hz: float) -> float:
        return noise_power(bandwidth_hz, self.noise_figure_db, self.spectral_density_dbm_hz)


def k_factor_sample(is_los: bool, rng: np.random.Generator,
                    mean_db: float = 9.0, std_db: float = 3.5) -> float:
    """Log-normal K factor for LOS links; NLOS links are pure Rayleigh."""
    if not is_los:
        return -math.inf
    return float(rng.normal(mean_db, std_db))


def steering_matrix(tx_pos, tx_rows: int, tx_cols: int, spacing_wl: float,
                    rx_positions: np.ndarray) -> np.ndarray:
    """Planar-array response rows toward each rx position (n_rx, n_tx)."""
    pos = np.atleast_2d(np.asarray(rx_positions, dtype=np.float64))
    return _kernels.steering_rows(np.asarray(tx_pos, dtype=np.float64),
                                  tx_rows, tx_cols, spacing_wl, pos)


def channel_matrix(fading: FadingState) -> np.ndarray:
    """One Ricean realization H (n_rx, n_tx) with E[|H_ij|^2] = 1.

    H = sqrt(K/(K+1)) * H_LOS + sqrt(1/(K+1)) * H_NLOS where H_LOS is the
    geometric steering response and H_NLOS is i.i.d. CN(0, 1).
    """
    n_rx, n_tx = fading.steering.shape
    g = (fading.rng.standard_normal((n_rx, n_tx))
         + 1j * fading.rng.standard_normal((n_rx, n_tx))) / math.sqrt(2.0)
    k = np.full(n_rx, fading.k_linear)
    return _kernels.ricean_rows(fading.steering, g, k)


def dump_large_scale_csv(links, path: str) -> None:
    """Debug dump: tx, rx, d3d, los, pl, shadow per link."""
    with open(path, "w") as fh:
        fh.write("tx,rx,d3d_m,los,path_loss_db,shadowing_db\n")
        for ln in links:
            fh.write(f"{ln.tx_id},{ln.rx_id},{ln.distance_3d_m:.3f},"
                     f"{int(ln.is_los)},{ln.path_loss_db:.4f},{ln.shadowing_db:.4f}\n")
