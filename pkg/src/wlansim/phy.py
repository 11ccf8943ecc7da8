"""MU-MIMO link abstraction: MCS rate table, zero-forcing precoding and
detection SINRs, PPDU duration arithmetic, threshold error model, CSI
sounding overhead, and Minstrel rate control.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import _kernels
from .channel import db_to_lin

# OFDMA data subcarriers per channel width (MHz)
DATA_SUBCARRIERS = {20: 234, 40: 468, 80: 980, 160: 1960}


class PhyError(ValueError):
    pass


class DegenerateSelectionError(PhyError):
    """Raised when the scheduled channel stack is rank deficient."""


# ---------------------------------------------------------------------------
# MCS table


@dataclass
class McsEntry:
    index: int
    modulation: str
    bits_per_symbol: int
    code_rate: float
    min_sinr_db: float

    def data_rate_mbps(self, bandwidth_mhz: int, n_ss: int, guard_us: float = 0.8,
                       symbol_base_us: float = 12.8) -> float:
        if bandwidth_mhz not in DATA_SUBCARRIERS:
            raise PhyError(f"unsupported bandwidth {bandwidth_mhz} MHz")
        bits = DATA_SUBCARRIERS[bandwidth_mhz] * self.bits_per_symbol * self.code_rate * n_ss
        return bits / (symbol_base_us + guard_us)


class McsTable:
    def __init__(self, entries: list[McsEntry]):
        if not entries:
            raise PhyError("empty MCS table")
        entries = sorted(entries, key=lambda e: e.index)
        for i, e in enumerate(entries):
            if e.index != i:
                raise PhyError("MCS indices must be 0..n-1 without gaps")
        for a, b in zip(entries, entries[1:]):
            if b.data_rate_mbps(80, 1) <= a.data_rate_mbps(80, 1):
                raise PhyError("data rate must increase strictly with MCS index")
        self.entries = entries

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx: int) -> McsEntry:
        return self.entries[idx]

    def rates_mbps(self, bandwidth_mhz: int, n_ss: int = 1, guard_us: float = 0.8) -> np.ndarray:
        return np.array([e.data_rate_mbps(bandwidth_mhz, n_ss, guard_us) for e in self.entries])

    def bits_per_ofdm_symbol(self, bandwidth_mhz: int, n_ss: int = 1) -> np.ndarray:
        n_sd = DATA_SUBCARRIERS[bandwidth_mhz]
        return np.array([n_sd * e.bits_per_symbol * e.code_rate * n_ss for e in self.entries])

    def min_sinr_db(self) -> np.ndarray:
        return np.array([e.min_sinr_db for e in self.entries])


def load_mcs_table(path: str | None = None) -> McsTable:
    """Load the MCS table from CSV; None loads the builtin 802.11ax table."""
    if path is None:
        src = resources.files("wlansim").joinpath("data/mcs_11ax.csv")
        fh = src.open("r")
    else:
        fh = open(path)
    with fh:
        entries = []
        for row in csv.DictReader(fh):
            entries.append(McsEntry(
                index=int(row["index"]),
                modulation=row["modulation"],
                bits_per_symbol=int(row["bits_per_symbol"]),
                code_rate=int(row["code_rate_num"]) / int(row["code_rate_den"]),
                min_sinr_db=float(row["min_sinr_db"]),
            ))
    return McsTable(entries)


# ---------------------------------------------------------------------------
# Zero forcing


def zf_precoders(h_rows: np.ndarray) -> np.ndarray:
    """Unit-norm ZF precoding vectors (columns) for stacked user rows.

    W = H^H (H H^H)^-1 with columns normalized; h_i . w_j = 0 for i != j.
    """
    h = np.atleast_2d(np.asarray(h_rows, dtype=np.complex128))
    k, nt = h.shape
    if k > nt:
        raise DegenerateSelectionError(f"{k} users on {nt} antennas")
    gram = h @ h.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise DegenerateSelectionError("rank-deficient user stack")
    w = h.conj().T @ np.linalg.inv(gram)
    return w / np.linalg.norm(w, axis=0, keepdims=True)


def zf_effective_gains(h_rows: np.ndarray) -> np.ndarray:
    """Per-user power gain 1/[(H H^H)^-1]_ii of zero forcing."""
    h = np.atleast_2d(np.asarray(h_rows, dtype=np.complex128))
    gains = _kernels.zf_gains(h)
    if not np.all(np.isfinite(gains)) or np.any(gains <= 0):
        raise DegenerateSelectionError("rank-deficient user stack")
    return gains


def dl_sinr_db(zf_gain, large_scale_gain_lin, total_tx_dbm: float, n_users: int,
               interference_mw, noise_mw: float):
    """Downlink SINR with an equal per-STA power split of the AP budget."""
    per_user_mw = db_to_lin(total_tx_dbm) / n_users
    sig = per_user_mw * np.asarray(large_scale_gain_lin) * np.asarray(zf_gain)
    return 10.0 * np.log10(sig / (noise_mw + np.asarray(interference_mw)))


def ul_sinr_db(zf_gain, large_scale_gain_lin, sta_tx_dbm: float,
               interference_mw, noise_mw: float):
    """Uplink ZF-detection SINR; each STA transmits at its own full power."""
    sig = db_to_lin(sta_tx_dbm) * np.asarray(large_scale_gain_lin) * np.asarray(zf_gain)
    return 10.0 * np.log10(sig / (noise_mw + np.asarray(interference_mw)))


# ---------------------------------------------------------------------------
# PPDU duration


def ppdu_duration_us(payload_bytes_per_user, mcs_per_user, table: McsTable,
                     bandwidth_mhz: int, guard_us: float = 0.8,
                     preamble_us: float = 44.0, overhead_bytes: int = 40,
                     symbol_base_us: float = 12.8) -> float:
    """Duration of one (MU) PPDU; users are padded to the slowest one."""
    sym_us = symbol_base_us + guard_us
    n_sym = 0
    for payload, mcs in zip(payload_bytes_per_user, mcs_per_user):
        if payload <= 0:
            continue
        bits = (payload + overhead_bytes) * 8
        per_sym = table[mcs].bits_per_symbol * table[mcs].code_rate * DATA_SUBCARRIERS[bandwidth_mhz]
        n_sym = max(n_sym, math.ceil(bits / per_sym))
    return preamble_us + n_sym * sym_us


# ---------------------------------------------------------------------------
# Error model


def packet_error_rate(sinr_db: float, min_sinr_db: float) -> float:
    """Thresholded waterfall: PER 1 below (min-1) dB, 0.1 at min, then one
    decade per dB, log-linear throughout."""
    per = 10.0 ** (-(sinr_db - min_sinr_db + 1.0))
    return min(1.0, per)


def decode_outcome(sinr_db: float, mcs: McsEntry, payload_bits: int,
                   rng: np.random.Generator) -> bool:
    """Per-MPDU success draw. The default curve ignores payload size (the
    canonical traffic uses fixed 1500-byte MPDUs)."""
    del payload_bits
    return bool(rng.random() >= packet_error_rate(sinr_db, mcs.min_sinr_db))


def decode_batch(n_mpdus: int, sinr_db: float, min_sinr_db: float,
                 rng: np.random.Generator) -> int:
    """Number of successes among n i.i.d. MPDU decodes at one SINR."""
    per = packet_error_rate(sinr_db, min_sinr_db)
    if per >= 1.0:
        return 0
    if per <= 0.0:
        return n_mpdus
    return int(rng.binomial(n_mpdus, 1.0 - per))


# ---------------------------------------------------------------------------
# CSI acquisition overhead


@dataclass
class SoundingPolicy:
    mode: str                          # "explicit" | "implicit"
    ndp_ltf_us_per_stream: float = 8.0
    report_us_per_stream: float = 4.0
    pilot_us_per_sta: float = 8.0


def sounding_overhead_us(policy: SoundingPolicy, n_sta: int, n_ss: int,
                         bandwidth_mhz: int,
                         feedback_scales=None) -> float:
    """Airtime charged to a TXOP before DL MU data when CSI is stale.

    Explicit scales with sounded streams: NDP training plus one compressed
    feedback frame per STA, whose duration grows with the sounded streams
    and with how slow that STA's feedback rate is (feedback_scales, >= 1;
    cell-edge STAs report at low MCS). Implicit is one uplink pilot slot
    per STA, independent of the AP antenna count.
    """
    if n_sta <= 0:
        return 0.0
    if policy.mode == "implicit":
        return n_sta * policy.pilot_us_per_sta
    bw_factor = bandwidth_mhz / 80.0
    if feedback_scales is None:
        feedback_scales = [1.0] * n_sta
    ndp = n_ss * policy.ndp_ltf_us_per_stream
    feedback = sum(policy.report_us_per_stream * n_ss * bw_factor * s
                   for s in feedback_scales)
    return ndp + feedback


# ---------------------------------------------------------------------------
# Minstrel rate control


@dataclass
class MinstrelState:
    """Per-(device, peer, direction) rate-control statistics."""
    rates_mbps: np.ndarray
    ewma_weight: float = 0.25
    probe_probability: float = 0.1
    prob: np.ndarray = field(default=None)
    attempts: np.ndarray = field(default=None)
    best: int = 0
    second_best: int = 0
    lowest: int = 0

    def __post_init__(self):
        n = len(self.rates_mbps)
        if self.prob is None:
            self.prob = np.zeros(n)
        if self.attempts is None:
            self.attempts = np.zeros(n, dtype=np.int64)

    def throughput_estimates(self) -> np.ndarray:
        return self.rates_mbps * self.prob

    def recompute_best(self) -> None:
        est = self.throughput_estimates()
        order = np.argsort(-est, kind="stable")
        self.best = int(order[0]) if est[order[0]] > 0 else self.lowest
        self.second_best = int(order[1]) if len(order) > 1 and est[order[1]] > 0 else self.lowest


def minstrel_select(state: MinstrelState, rng: np.random.Generator) -> tuple[int, bool]:
    """Pick the next MCS; True marks a probe (caller caps its batch size).

    Untried rates are probed first: the very first pick is the lowest rate
    (conservative start), after which the ramp roughly doubles the index
    per step; minstrel_update writes off rates the outcome already implies.
    Once every rate has statistics, a random non-best rate is probed with
    the configured probability, else the best-throughput rate is used.
    """
    untried = np.flatnonzero(state.attempts == 0)
    if untried.size:
        tried = np.flatnonzero(state.attempts > 0)
        if tried.size == 0:
            return int(untried[0]), True
        target = min(2 * int(tried.max()) + 1, len(state.rates_mbps) - 1)
        below = untried[untried <= target]
        return int(below.max()) if below.size else int(untried.min()), True
    if state.probe_probability > 0 and rng.random() < state.probe_probability:
        n = len(state.rates_mbps)
        if n > 1:
            pick = int(rng.integers(0, n - 1))
            if pick >= state.best:
                pick += 1
            return pick, True
    return state.best, False


def minstrel_update(state: MinstrelState, mcs: int, success_ratio: float) -> None:
    """EWMA the observed success ratio into the attempted rate's stats.

    The PER curve is monotone in SINR, so a clean success also vouches for
    every slower untried rate and a hard failure writes off every faster
    untried rate; both count as inferred first observations, which keeps
    the startup ramp short without touching real statistics.
    """
    w = state.ewma_weight
    state.prob[mcs] = (1.0 - w) * state.prob[mcs] + w * success_ratio
    state.attempts[mcs] += 1
    if success_ratio >= 0.9:
        # a clean batch vouches for every slower rate: seed untried ones
        # (ramp) and lift tried ones above the current best (recovery from
        # collision-poisoned statistics); rates at or below best keep their
        # own statistics so the selection cannot ratchet downwards
        for r in range(mcs):
            if state.attempts[r] == 0 or r > state.best:
                state.prob[r] = (1.0 - w) * state.prob[r] + w * success_ratio
                if state.attempts[r] == 0:
                    state.attempts[r] = 1
    elif success_ratio <= 0.1:
        # hard failure writes off only untried faster rates (ramp shortcut);
        # tried rates keep their own statistics since the loss may have been
        # interference rather than SINR
        for r in range(mcs + 1, len(state.rates_mbps)):
            if state.attempts[r] == 0:
                state.attempts[r] = 1
    state.recompute_best()
